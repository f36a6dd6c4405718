use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{LedgerEntry, Strategy, SystemOutput};

/// Identity of a generated output: reruns with the same key reuse it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CacheKey {
    pub model_id: String,
    pub strategy: Strategy,
    pub pair_id: String,
    pub prompt_hash: String,
}

impl CacheKey {
    pub fn of(output: &SystemOutput) -> Self {
        Self {
            model_id: output.model_id.clone(),
            strategy: output.strategy,
            pair_id: output.pair_id.clone(),
            prompt_hash: output.prompt_hash.clone(),
        }
    }
}

pub(crate) fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

const ERRORS_FILE: &str = "errors.jsonl";

/// Output cache backed by append-only JSONL files, one per
/// (corpus, model, strategy) under `root/<corpus>/<model>/<strategy>.jsonl`.
///
/// Safe for concurrent writers; every output is flushed as a single line so a
/// killed run leaves at most one truncated line, which is skipped on reload.
#[derive(Debug, Default)]
pub struct OutputStore {
    root: Option<PathBuf>,
    entries: Mutex<HashMap<CacheKey, SystemOutput>>,
    files: Mutex<HashMap<PathBuf, File>>,
}

impl OutputStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) a store rooted at `root` and loads every
    /// output already persisted there.
    pub fn open(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        let mut entries = HashMap::new();
        for path in jsonl_files(root)? {
            if path.file_name().is_some_and(|n| n == ERRORS_FILE) {
                continue;
            }
            let body = fs::read_to_string(&path)?;
            for (i, line) in body.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                match serde_json::from_str::<SystemOutput>(line) {
                    Ok(out) => {
                        entries.insert(CacheKey::of(&out), out);
                    }
                    Err(e) => log::warn!("{}:{}: skipping unreadable output: {e}", path.display(), i + 1),
                }
            }
        }
        Ok(Self {
            root: Some(root.to_path_buf()),
            entries: Mutex::new(entries),
            files: Mutex::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &CacheKey) -> Option<SystemOutput> {
        self.entries.lock().expect("store lock").get(key).cloned()
    }

    pub fn output_path(&self, corpus_id: &str, model_id: &str, strategy: Strategy) -> Option<PathBuf> {
        self.root
            .as_ref()
            .map(|r| r.join(slug(corpus_id)).join(slug(model_id)).join(format!("{}.jsonl", strategy.name())))
    }

    fn append(&self, path: PathBuf, line: &str) -> io::Result<()> {
        let mut files = self.files.lock().expect("file lock");
        if !files.contains_key(&path) {
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            let f = OpenOptions::new().create(true).append(true).open(&path)?;
            files.insert(path.clone(), f);
        }
        let f = files.get_mut(&path).expect("just inserted");
        f.write_all(format!("{line}\n").as_bytes())?;
        f.flush()
    }

    /// Caches and persists an output.
    pub fn insert(&self, output: SystemOutput) -> io::Result<()> {
        if let Some(path) = self.output_path(&output.corpus_id, &output.model_id, output.strategy) {
            let line = serde_json::to_string(&output)?;
            self.append(path, &line)?;
        }
        self.entries.lock().expect("store lock").insert(CacheKey::of(&output), output);
        Ok(())
    }

    /// Appends a failure to `errors.jsonl`.
    pub fn record_error(&self, entry: &LedgerEntry) -> io::Result<()> {
        if let Some(root) = &self.root {
            let line = serde_json::to_string(entry)?;
            self.append(root.join(ERRORS_FILE), &line)?;
        }
        Ok(())
    }

    /// Every output file currently under the store root, sorted.
    pub fn output_files(&self) -> io::Result<Vec<PathBuf>> {
        match &self.root {
            Some(root) => Ok(jsonl_files(root)?
                .into_iter()
                .filter(|p| p.file_name().is_none_or(|n| n != ERRORS_FILE))
                .collect()),
            None => Ok(Vec::new()),
        }
    }

    /// All cached outputs, sorted by key.
    pub fn all(&self) -> Vec<SystemOutput> {
        let entries = self.entries.lock().expect("store lock");
        let mut keys: Vec<&CacheKey> = entries.keys().collect();
        keys.sort();
        keys.into_iter().map(|k| entries[k].clone()).collect()
    }
}

fn jsonl_files(root: &Path) -> io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "jsonl") {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}
