//! Minimal `key = value` text format shared by the code-spec and simulation
//! config files. `#` starts a comment; blank lines are ignored; list values
//! are comma separated.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

pub(crate) struct KeyValues {
    path: PathBuf,
    entries: BTreeMap<String, (usize, String)>,
    used: RefCell<Vec<String>>,
}

impl KeyValues {
    pub(crate) fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    msg: format!("expected `key = value`, found `{line}`"),
                });
            };
            let key = key.trim().to_string();
            if entries
                .insert(key.clone(), (line_no, value.trim().to_string()))
                .is_some()
            {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    msg: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
            entries,
            used: RefCell::new(Vec::new()),
        })
    }

    fn err(&self, line: usize, msg: String) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            msg,
        }
    }

    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.used.borrow_mut().push(key.to_string());
        self.entries.get(key)
    }

    pub(crate) fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| self.err(*line, format!("cannot parse `{key}` from `{v}`"))),
        }
    }

    pub(crate) fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| self.err(0, format!("missing required key `{key}`")))
    }

    pub(crate) fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse()
                        .map_err(|_| self.err(*line, format!("cannot parse element `{s}` of `{key}`")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    pub(crate) fn require_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        self.get_list(key)?
            .ok_or_else(|| self.err(0, format!("missing required key `{key}`")))
    }

    /// Fails on keys that were never looked up, which catches typos.
    pub(crate) fn reject_unknown(&self) -> Result<()> {
        let used = self.used.borrow();
        for (key, (line, _)) in &self.entries {
            if !used.iter().any(|u| u == key) {
                return Err(self.err(*line, format!("unknown key `{key}`")));
            }
        }
        Ok(())
    }
}
