use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PRIOR_SCHEMA: &str = "seek-rsn/1";
/// Name of both the fallback room type and the fallback object row.
pub const UNKNOWN: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectPrior {
    /// Probability of finding the object in a room of each type.
    pub room_probs: BTreeMap<String, f64>,
    /// Probability of spotting the object just by entering a room that holds it.
    pub p_easy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorTableDoc {
    schema: String,
    room_types: Vec<String>,
    objects: BTreeMap<String, ObjectPrior>,
}

/// Object-to-room-type probabilities plus per-object `p_easy`.
///
/// Missing `(object, type)` entries fall back to the "unknown" object row;
/// room labels outside `room_types` map to the "unknown" type.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorTable {
    room_types: Vec<String>,
    objects: BTreeMap<String, ObjectPrior>,
    unknown: ObjectPrior,
}

/// Lowercases and joins words with underscores: "Meeting Room" -> "meeting_room".
pub fn normalize_label(label: &str) -> String {
    label
        .trim()
        .to_lowercase()
        .split(|c: char| c.is_whitespace() || c == '-' || c == '_' || c == '/')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

impl PriorTable {
    pub fn new(room_types: Vec<String>, objects: BTreeMap<String, ObjectPrior>) -> Result<Self> {
        let mut room_types: Vec<String> = room_types.iter().map(|t| normalize_label(t)).collect();
        if !room_types.iter().any(|t| t == UNKNOWN) {
            room_types.push(UNKNOWN.into());
        }
        let mut normalized = BTreeMap::new();
        for (name, row) in objects {
            let key = normalize_label(&name);
            check_prob(&format!("objects.{name}.p_easy"), row.p_easy)?;
            let mut probs = BTreeMap::new();
            for (t, p) in row.room_probs {
                let t_key = normalize_label(&t);
                if !room_types.contains(&t_key) {
                    return Err(Error::input(
                        format!("objects.{name}.room_probs.{t}"),
                        "room type not declared in room_types",
                    ));
                }
                check_prob(&format!("objects.{name}.room_probs.{t}"), p)?;
                probs.insert(t_key, p);
            }
            normalized.insert(
                key,
                ObjectPrior {
                    room_probs: probs,
                    p_easy: row.p_easy,
                },
            );
        }
        // Uniform maximum-uncertainty row unless the file supplies one.
        let mut unknown = normalized.remove(UNKNOWN).unwrap_or(ObjectPrior {
            room_probs: BTreeMap::new(),
            p_easy: 0.5,
        });
        let fill = if unknown.room_probs.is_empty() {
            0.5
        } else {
            unknown.room_probs.values().sum::<f64>() / unknown.room_probs.len() as f64
        };
        for t in &room_types {
            unknown.room_probs.entry(t.clone()).or_insert(fill);
        }
        for row in normalized.values_mut() {
            for t in &room_types {
                if !row.room_probs.contains_key(t) {
                    row.room_probs.insert(t.clone(), unknown.room_probs[t]);
                }
            }
        }
        Ok(Self {
            room_types,
            objects: normalized,
            unknown,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::parse(text, Path::new("<prior table>"))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let doc: PriorTableDoc = serde_json::from_str(text).map_err(|e| Error::json(path, e))?;
        if doc.schema != PRIOR_SCHEMA {
            return Err(Error::input(
                "schema",
                format!("expected '{PRIOR_SCHEMA}', found '{}'", doc.schema),
            ));
        }
        Self::new(doc.room_types, doc.objects)
    }

    pub fn to_json(&self) -> String {
        let mut objects = self.objects.clone();
        objects.insert(UNKNOWN.into(), self.unknown.clone());
        let doc = PriorTableDoc {
            schema: PRIOR_SCHEMA.into(),
            room_types: self.room_types.clone(),
            objects,
        };
        serde_json::to_string_pretty(&doc).expect("table serializes")
    }

    pub fn room_types(&self) -> &[String] {
        &self.room_types
    }

    pub fn objects(&self) -> impl Iterator<Item = &str> {
        self.objects.keys().map(String::as_str)
    }

    pub fn knows(&self, object_class: &str) -> bool {
        self.objects.contains_key(&normalize_label(object_class))
    }

    pub fn row(&self, object_class: &str) -> &ObjectPrior {
        self.objects
            .get(&normalize_label(object_class))
            .unwrap_or(&self.unknown)
    }

    /// Room type a floor-plan label maps to.
    pub fn room_type<'a>(&'a self, label: &str) -> &'a str {
        let key = normalize_label(label);
        self.room_types
            .iter()
            .find(|t| **t == key)
            .map(String::as_str)
            .unwrap_or(UNKNOWN)
    }

    pub fn room_prob(&self, object_class: &str, room_label: &str) -> f64 {
        let t = self.room_type(room_label);
        self.row(object_class).room_probs[t]
    }

    pub fn p_easy(&self, object_class: &str) -> f64 {
        self.row(object_class).p_easy
    }
}

fn check_prob(field: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::input(field, format!("probability {p} outside [0, 1]")))
    }
}
