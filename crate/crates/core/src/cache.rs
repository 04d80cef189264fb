//! On-disk cache of ring components and solved `Lambda` slices.
//!
//! One JSON file per `(kind, algebra, degree, seed, format version)`. Each
//! file carries a SHA-256 of its payload; anything that fails to parse, has
//! the wrong version or checksum, or was built on different ring data is
//! rebuilt. Writes go to a temporary file that is then renamed.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lambda::{solve_lambda, LambdaFamily, LambdaSlice, Strategy};
use crate::constants::ConstantsContext;
use crate::lie::AlgebraSpec;
use crate::linalg::SparseMatrix;
use crate::orbit::{build_component, OrbitRing, RingBasis};
use crate::scalar::{format_qi, parse_qi, Qi};

pub const FORMAT_VERSION: u32 = 1;

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "MINORBIT_CACHE_DIR";

#[derive(Serialize, Deserialize)]
struct Envelope {
    format_version: u32,
    kind: String,
    algebra: String,
    degree: usize,
    seed: u64,
    checksum: String,
    payload: Value,
}

#[derive(Serialize, Deserialize)]
struct BasisData {
    standard: Vec<usize>,
    nf: Vec<Vec<(usize, String)>>,
    samples: usize,
}

#[derive(Serialize, Deserialize)]
struct SparseData {
    rows: usize,
    columns: Vec<Vec<(usize, String)>>,
}

#[derive(Serialize, Deserialize)]
struct LambdaData {
    /// Checksums of the ring components the slice was solved on.
    basis_checksums: [String; 2],
    ops: Vec<SparseData>,
    multiplier: String,
    nullity: usize,
    strategy: Strategy,
}

/// What happened to one cache entry during a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CacheEvent {
    pub entry: String,
    /// `hit`, `built`, `rebuilt: <reason>` or `memory: <reason>`.
    pub outcome: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CacheEntry {
    pub file: String,
    pub bytes: u64,
}

#[derive(Debug)]
pub struct Cache {
    dir: Option<PathBuf>,
    pub events: Vec<CacheEvent>,
    /// Payload checksums of every entry used, for the report.
    pub checksums: std::collections::BTreeMap<String, String>,
}

fn checksum(v: &Value) -> String {
    let bytes = serde_json::to_vec(v).unwrap_or_default();
    hex::encode(Sha256::digest(bytes))
}

fn encode_sparse(m: &SparseMatrix<Qi>) -> SparseData {
    SparseData {
        rows: m.rows(),
        columns: (0..m.cols())
            .map(|j| m.column(j).iter().map(|(i, v)| (*i, format_qi(v))).collect())
            .collect(),
    }
}

fn decode_entries(v: &[(usize, String)]) -> Result<Vec<(usize, Qi)>> {
    v.iter().map(|(i, s)| Ok((*i, parse_qi(s)?))).collect()
}

fn decode_sparse(d: &SparseData) -> Result<SparseMatrix<Qi>> {
    let columns = d.columns.iter().map(|c| decode_entries(c)).collect::<Result<Vec<_>>>()?;
    if columns.iter().flatten().any(|(i, _)| *i >= d.rows) {
        return Err(Error::Cache("sparse entry out of range".into()));
    }
    Ok(SparseMatrix::from_sparse_columns(d.rows, columns))
}

impl Cache {
    /// Use `dir`, creating it if needed; fall back to memory if that fails.
    pub fn new(dir: Option<PathBuf>) -> Self {
        let mut cache = Cache {
            dir: None,
            events: Vec::new(),
            checksums: Default::default(),
        };
        if let Some(d) = dir {
            match fs::create_dir_all(&d) {
                Ok(()) => cache.dir = Some(d),
                Err(e) => cache.events.push(CacheEvent {
                    entry: d.display().to_string(),
                    outcome: format!("memory: cannot create cache directory ({e})"),
                }),
            }
        }
        cache
    }

    /// No persistence at all.
    pub fn memory() -> Self {
        Self::new(None)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn file_name(kind: &str, algebra: &str, degree: usize, seed: u64) -> String {
        format!("{algebra}-{kind}-d{degree}-s{seed}-v{FORMAT_VERSION}.json")
    }

    fn load(&self, kind: &str, algebra: &str, degree: usize, seed: u64) -> std::result::Result<Option<(Value, String)>, String> {
        let Some(dir) = &self.dir else {
            return Ok(None);
        };
        let path = dir.join(Self::file_name(kind, algebra, degree, seed));
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(format!("unreadable: {e}")),
        };
        let env: Envelope = serde_json::from_str(&text).map_err(|e| format!("corrupt: {e}"))?;
        if env.format_version != FORMAT_VERSION {
            return Err(format!("format version {} != {FORMAT_VERSION}", env.format_version));
        }
        if env.kind != kind || env.algebra != algebra || env.degree != degree || env.seed != seed {
            return Err("key mismatch".into());
        }
        if checksum(&env.payload) != env.checksum {
            return Err("checksum mismatch".into());
        }
        Ok(Some((env.payload, env.checksum)))
    }

    /// Atomic write; on failure the cache degrades to memory.
    fn store(&mut self, kind: &str, algebra: &str, degree: usize, seed: u64, payload: Value) -> String {
        let sum = checksum(&payload);
        let Some(dir) = self.dir.clone() else {
            return sum;
        };
        let name = Self::file_name(kind, algebra, degree, seed);
        let env = Envelope {
            format_version: FORMAT_VERSION,
            kind: kind.into(),
            algebra: algebra.into(),
            degree,
            seed,
            checksum: sum.clone(),
            payload,
        };
        let result = (|| -> std::io::Result<()> {
            let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
            fs::write(&tmp, serde_json::to_vec(&env)?)?;
            fs::rename(&tmp, dir.join(&name))
        })();
        if let Err(e) = result {
            self.events.push(CacheEvent {
                entry: name,
                outcome: format!("memory: write failed ({e})"),
            });
            self.dir = None;
        }
        sum
    }

    fn typed<T: DeserializeOwned>(v: Value) -> std::result::Result<T, String> {
        serde_json::from_value(v).map_err(|e| format!("corrupt: {e}"))
    }

    fn record(&mut self, entry: String, outcome: String, sum: String) {
        self.checksums.insert(entry.clone(), sum);
        self.events.push(CacheEvent { entry, outcome });
    }

    /// Ring component of degree `d`, from cache or built.
    pub fn basis(&mut self, spec: &AlgebraSpec, d: usize, seed: u64, margin: f64) -> Result<(RingBasis, String)> {
        let algebra = spec.name();
        let entry = Self::file_name("basis", &algebra, d, seed);
        let mut reason = None;
        match self.load("basis", &algebra, d, seed) {
            Ok(Some((payload, sum))) => {
                let decoded = Self::typed::<BasisData>(payload).and_then(|b| {
                    let nf = b.nf.iter().map(|r| decode_entries(r)).collect::<Result<Vec<_>>>().map_err(|e| e.to_string())?;
                    RingBasis::from_parts(spec, d, b.standard, nf, b.samples).map_err(|e| e.to_string())
                });
                match decoded {
                    Ok(basis) => {
                        self.record(entry, "hit".into(), sum.clone());
                        return Ok((basis, sum));
                    }
                    Err(r) => reason = Some(r),
                }
            }
            Ok(None) => {}
            Err(r) => reason = Some(r),
        }
        let basis = build_component(spec, d, seed, margin)?;
        let data = BasisData {
            standard: basis.standard.clone(),
            nf: basis.nf.iter().map(|r| r.iter().map(|(i, v)| (*i, format_qi(v))).collect()).collect(),
            samples: basis.samples,
        };
        let sum = self.store("basis", &algebra, d, seed, serde_json::to_value(data)?);
        let outcome = reason.map_or("built".into(), |r| format!("rebuilt: {r}"));
        self.record(entry, outcome, sum.clone());
        Ok((basis, sum))
    }

    /// The ring through degree `top`.
    pub fn ring(&mut self, spec: Arc<AlgebraSpec>, top: usize, seed: u64, margin: f64) -> Result<(OrbitRing, Vec<String>)> {
        let mut bases = Vec::with_capacity(top + 1);
        let mut sums = Vec::with_capacity(top + 1);
        for d in 0..=top {
            let (b, s) = self.basis(&spec, d, seed, margin)?;
            bases.push(b);
            sums.push(s);
        }
        Ok((OrbitRing::from_bases(spec, seed, bases)?, sums))
    }

    /// `Lambda` through degree `cap` on a ring whose component checksums are `sums`.
    pub fn lambda(&mut self, ring: &OrbitRing, sums: &[String], cap: usize, seed: u64) -> Result<LambdaFamily> {
        let algebra = ring.spec.name();
        let ctx = ConstantsContext::from_spec(&ring.spec);
        let mut slices = Vec::with_capacity(cap);
        for p in 1..=cap {
            let entry = Self::file_name("lambda", &algebra, p, seed);
            let expected = [sums[p - 1].clone(), sums[p].clone()];
            let mut reason = None;
            let mut found = None;
            match self.load("lambda", &algebra, p, seed) {
                Ok(Some((payload, sum))) => {
                    let decoded = Self::typed::<LambdaData>(payload).and_then(|l| {
                        if l.basis_checksums != expected {
                            return Err("built on different ring data".into());
                        }
                        let ops = l.ops.iter().map(decode_sparse).collect::<Result<Vec<_>>>().map_err(|e| e.to_string())?;
                        if ops.len() != ring.nvars() || ops.iter().any(|o| o.rows() != ring.dim(p - 1) || o.cols() != ring.dim(p)) {
                            return Err("operator shapes do not match the ring".into());
                        }
                        Ok(LambdaSlice {
                            degree: p,
                            ops,
                            multiplier: parse_qi(&l.multiplier).map_err(|e| e.to_string())?,
                            nullity: l.nullity,
                            strategy: l.strategy,
                        })
                    });
                    match decoded {
                        Ok(s) => found = Some((s, sum)),
                        Err(r) => reason = Some(r),
                    }
                }
                Ok(None) => {}
                Err(r) => reason = Some(r),
            }
            if let Some((s, sum)) = found {
                self.record(entry, "hit".into(), sum);
                slices.push(s);
                continue;
            }
            let s = solve_lambda(ring, &ctx, p, seed)?;
            let data = LambdaData {
                basis_checksums: expected,
                ops: s.ops.iter().map(encode_sparse).collect(),
                multiplier: format_qi(&s.multiplier),
                nullity: s.nullity,
                strategy: s.strategy,
            };
            let sum = self.store("lambda", &algebra, p, seed, serde_json::to_value(data)?);
            let outcome = reason.map_or("built".into(), |r| format!("rebuilt: {r}"));
            self.record(entry, outcome, sum);
            slices.push(s);
        }
        Ok(LambdaFamily { slices })
    }

    /// Cache files currently on disk.
    pub fn list(&self) -> Result<Vec<CacheEntry>> {
        let Some(dir) = &self.dir else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for e in fs::read_dir(dir)? {
            let e = e?;
            let name = e.file_name().to_string_lossy().into_owned();
            if name.ends_with(".json") && !name.starts_with('.') {
                out.push(CacheEntry { file: name, bytes: e.metadata()?.len() });
            }
        }
        out.sort_by(|a, b| a.file.cmp(&b.file));
        Ok(out)
    }

    /// Delete all cache files; returns how many were removed.
    pub fn clear(&self) -> Result<usize> {
        let Some(dir) = &self.dir else {
            return Ok(0);
        };
        let entries = self.list()?;
        for e in &entries {
            fs::remove_file(dir.join(&e.file))?;
        }
        Ok(entries.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::build_named;

    fn outcomes(c: &Cache) -> Vec<&str> {
        c.events.iter().map(|e| e.outcome.as_str()).collect()
    }

    #[test]
    fn round_trip_and_rebuild() {
        let dir = tempfile::tempdir().unwrap();
        let spec = Arc::new(build_named("sl3").unwrap());
        let mut c = Cache::new(Some(dir.path().to_path_buf()));
        let (ring, sums) = c.ring(spec.clone(), 2, 7, 1.25).unwrap();
        let fam = c.lambda(&ring, &sums, 2, 7).unwrap();
        assert!(outcomes(&c).iter().all(|o| *o == "built"));

        let mut c2 = Cache::new(Some(dir.path().to_path_buf()));
        let (ring2, sums2) = c2.ring(spec.clone(), 2, 7, 1.25).unwrap();
        let fam2 = c2.lambda(&ring2, &sums2, 2, 7).unwrap();
        assert!(outcomes(&c2).iter().all(|o| *o == "hit"));
        assert_eq!(fam.slices, fam2.slices);
        assert_eq!(sums, sums2);

        // A different seed does not reuse entries.
        let mut c3 = Cache::new(Some(dir.path().to_path_buf()));
        c3.ring(spec.clone(), 1, 8, 1.25).unwrap();
        assert!(outcomes(&c3).iter().all(|o| *o == "built"));

        // Deleting one degree rebuilds only that degree; corruption is detected.
        fs::remove_file(dir.path().join(Cache::file_name("basis", "sl3", 2, 7))).unwrap();
        fs::write(dir.path().join(Cache::file_name("lambda", "sl3", 1, 7)), "{not json").unwrap();
        let mut c4 = Cache::new(Some(dir.path().to_path_buf()));
        let (ring4, sums4) = c4.ring(spec, 2, 7, 1.25).unwrap();
        c4.lambda(&ring4, &sums4, 2, 7).unwrap();
        let o = outcomes(&c4);
        assert_eq!(o[..3], ["hit", "hit", "built"]);
        assert!(o[3].starts_with("rebuilt: corrupt"));
        assert_eq!(o[4], "hit");
    }

    #[test]
    fn unwritable_directory_degrades() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain-file");
        fs::write(&file, "x").unwrap();
        let c = Cache::new(Some(file.join("sub")));
        assert!(c.dir().is_none());
        assert!(c.events[0].outcome.starts_with("memory"));
    }
}
