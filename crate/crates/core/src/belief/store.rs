use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{normalize_label, ObservationEvent, ObservationMode};
use crate::error::{Error, Result};
use crate::scene_graph::RoomId;

pub const STORE_SCHEMA: &str = "seek-store/1";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub found: u32,
    pub searched: u32,
}

/// Cross-episode search outcomes per (object class, room).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PriorStore {
    counts: BTreeMap<(String, RoomId), Counts>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CountRow {
    object: String,
    room: RoomId,
    found: u32,
    searched: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoreDoc {
    schema: String,
    counts: Vec<CountRow>,
}

impl PriorStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counts(&self, object_class: &str, room: RoomId) -> Counts {
        self.counts
            .get(&(normalize_label(object_class), room))
            .copied()
            .unwrap_or_default()
    }

    pub fn set_counts(&mut self, object_class: &str, room: RoomId, counts: Counts) -> Result<()> {
        if counts.found > counts.searched {
            return Err(Error::input(
                format!("counts[{object_class}, {room}]"),
                "found exceeds searched",
            ));
        }
        self.counts.insert((normalize_label(object_class), room), counts);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Folds one finished episode into the counts: every room with a search
    /// event counts as searched once, and as found if any event there detected.
    pub fn commit_episode(&mut self, events: &[ObservationEvent], object_class: &str) {
        let searched: BTreeSet<RoomId> = events
            .iter()
            .filter(|e| e.mode == ObservationMode::Search)
            .map(|e| e.room)
            .collect();
        let key = normalize_label(object_class);
        for room in searched {
            let found = events.iter().any(|e| e.room == room && e.detected);
            let c = self.counts.entry((key.clone(), room)).or_default();
            c.searched += 1;
            if found {
                c.found += 1;
            }
        }
    }

    pub fn to_json(&self) -> String {
        let doc = StoreDoc {
            schema: STORE_SCHEMA.into(),
            counts: self
                .counts
                .iter()
                .map(|((object, room), c)| CountRow {
                    object: object.clone(),
                    room: *room,
                    found: c.found,
                    searched: c.searched,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("store serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::parse(text, Path::new("<store>"))
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let doc: StoreDoc = serde_json::from_str(text).map_err(|e| Error::json(path, e))?;
        if doc.schema != STORE_SCHEMA {
            return Err(Error::input(
                "schema",
                format!("expected '{STORE_SCHEMA}', found '{}'", doc.schema),
            ));
        }
        let mut store = PriorStore::new();
        for (i, row) in doc.counts.into_iter().enumerate() {
            if row.found > row.searched {
                return Err(Error::input(format!("counts[{i}]"), "found exceeds searched"));
            }
            let key = (normalize_label(&row.object), row.room);
            if store.counts.contains_key(&key) {
                return Err(Error::input(format!("counts[{i}]"), "duplicate (object, room) entry"));
            }
            store.counts.insert(
                key,
                Counts {
                    found: row.found,
                    searched: row.searched,
                },
            );
        }
        Ok(store)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Writes through a temporary sibling file and renames it into place, so
    /// readers never observe a partially written store.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file_name = path
            .file_name()
            .ok_or_else(|| Error::input("path", format!("{} has no file name", path.display())))?;
        let tmp = path.with_file_name(format!(
            ".{}.{}.{:?}.tmp",
            file_name.to_string_lossy(),
            std::process::id(),
            std::thread::current().id()
        ));
        std::fs::write(&tmp, self.to_json()).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }
}
