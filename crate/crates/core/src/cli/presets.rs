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

//! Built-in experiment configs.

const PRESETS: &[(&str, &str)] = &[
    ("table2", include_str!("../../presets/table2.json")),
    ("table2_paired", include_str!("../../presets/table2_paired.json")),
    ("nonrelativistic", include_str!("../../presets/nonrelativistic.json")),
    ("fig4a", include_str!("../../presets/fig4a.json")),
    ("fig4b", include_str!("../../presets/fig4b.json")),
    ("fig5", include_str!("../../presets/fig5.json")),
    ("fig5b", include_str!("../../presets/fig5b.json")),
    ("fig5c", include_str!("../../presets/fig5c.json")),
    ("fig5d", include_str!("../../presets/fig5d.json")),
    ("fig5e", include_str!("../../presets/fig5e.json")),
    ("fig5f", include_str!("../../presets/fig5f.json")),
];

/// JSON text of a preset, with or without a `.json` suffix.
pub fn get(name: &str) -> Option<&'static str> {
    let key = name.strip_suffix(".json").unwrap_or(name);
    PRESETS.iter().find(|(n, _)| *n == key).map(|(_, text)| *text)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}
