// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Optical-circuit compilation and Gaussian quench simulation for lattice
//! scalar field theories.
//!
//! A quadratic Hamiltonian `H = H^φ ⊕ H^π` with commuting blocks is compiled
//! into a circuit of beam splitters, squeezers and phase shifters whose only
//! time dependence sits in the phase layer. Gaussian states are evolved
//! through the resulting symplectic maps and compared against quasi-particle
//! predictions for entanglement and correlation spreading.
//!
//! Every numeric type is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod compiler;
pub mod engine;
pub mod error;
pub mod expm;
pub mod io;
pub mod lightcone;
pub mod models;
pub mod predict;
pub mod scalar;
pub mod sympcore;

pub mod cli;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SymplecticMatrix = sympcore::SymplecticMatrix<f64>;
pub type SymplecticForm = sympcore::SymplecticForm<f64>;
pub type GateSpec = sympcore::GateSpec<f64>;
pub type HamiltonianMatrix = models::HamiltonianMatrix<f64>;
pub type CirculantEigensystem = models::CirculantEigensystem<f64>;
pub type OTACircuit = compiler::OTACircuit<f64>;
pub type CoherentReduction = compiler::CoherentReduction<f64>;
pub type GaussianState = engine::GaussianState<f64>;
pub type DispersionTable = predict::DispersionTable<f64>;
pub type FrontFit = lightcone::FrontFit<f64>;
