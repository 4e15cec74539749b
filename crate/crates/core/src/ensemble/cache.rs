//! Content-addressed JSON cache of ensemble summaries.

use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::enumerate::InputSet;
use super::summary::{EnsembleSummary, SCHEMA_VERSION};
use crate::error::{Error, Result};

/// Directory-backed summary cache; writes replace whole files atomically.
#[derive(Clone, Debug)]
pub struct SummaryCache {
    dir: PathBuf,
}

impl SummaryCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(SummaryCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn key(set: &InputSet, cost: &str, k_max: usize) -> String {
        format!("v{SCHEMA_VERSION}|{}|{cost}|{}|{}|{k_max}", set.algo, set.n, set.reduced)
    }

    pub fn path_for(&self, set: &InputSet, cost: &str, k_max: usize) -> PathBuf {
        let digest = Sha256::digest(Self::key(set, cost, k_max).as_bytes());
        self.dir.join(format!("summary-{}.json", &hex::encode(digest)[..20]))
    }

    /// Cached summary, `None` when absent; a corrupt or mismatched file is an error.
    pub fn load(&self, set: &InputSet, cost: &str, k_max: usize) -> Result<Option<EnsembleSummary>> {
        let path = self.path_for(set, cost, k_max);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let bad = |why: String| Error::Cache(format!("{}: {why}", path.display()));
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            // stale entries from an older schema are simply recomputed
            Some(_) => return Ok(None),
            None => return Err(bad("missing schema_version".into())),
        }
        let s: EnsembleSummary = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
        if s.input_set() != *set || s.cost != cost || s.moments.len() != k_max {
            return Err(bad("entry does not match its key".into()));
        }
        s.check_invariants().map_err(|e| bad(e.to_string()))?;
        Ok(Some(s))
    }

    pub fn store(&self, summary: &EnsembleSummary) -> Result<PathBuf> {
        let path = self.path_for(&summary.input_set(), &summary.cost, summary.moments.len());
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer_pretty(&mut tmp, summary).map_err(|e| Error::Cache(e.to_string()))?;
        tmp.write_all(b"\n")?;
        tmp.persist(&path).map_err(|e| Error::Cache(e.to_string()))?;
        Ok(path)
    }

    /// Cached summary if present, otherwise computed with `make` and stored.
    pub fn get_or_insert_with(
        &self,
        set: &InputSet,
        cost: &str,
        k_max: usize,
        make: impl FnOnce() -> Result<EnsembleSummary>,
    ) -> Result<EnsembleSummary> {
        if let Some(s) = self.load(set, cost, k_max)? {
            return Ok(s);
        }
        let s = make()?;
        self.store(&s)?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::Algorithm;
    use crate::cost::DigitCost;
    use crate::ensemble::summary::summarize;

    #[test]
    fn round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SummaryCache::new(dir.path()).unwrap();
        let set = InputSet::reduced(Algorithm::Centered, 60);
        let s = summarize(&set, &DigitCost::binary_length(), 3).unwrap();
        assert!(cache.load(&set, "bits", 3).unwrap().is_none());
        let path = cache.store(&s).unwrap();
        assert_eq!(cache.load(&set, "bits", 3).unwrap(), Some(s.clone()));
        let got = cache.get_or_insert_with(&set, "bits", 3, || panic!("must hit")).unwrap();
        assert_eq!(got, s);

        std::fs::write(&path, "{ not json").unwrap();
        assert!(matches!(cache.load(&set, "bits", 3), Err(Error::Cache(_))));

        let mut v: serde_json::Value = serde_json::to_value(&s).unwrap();
        v["schema_version"] = serde_json::json!(SCHEMA_VERSION + 1);
        std::fs::write(&path, v.to_string()).unwrap();
        assert!(cache.load(&set, "bits", 3).unwrap().is_none());
    }
}
