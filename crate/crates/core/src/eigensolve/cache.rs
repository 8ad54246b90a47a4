//! On-disk cache of eigenpairs: one directory per `(profile, k, N)` with a
//! `meta.json` and a `radial.csv` whose columns are `theta,u0,u1,...`.

use super::{joint_eigenfunctions, EigenError, JointEigenfunction, Result};
use crate::geometry::{ProfileFunction, ProfileSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheMeta {
    pub profile: ProfileSpec,
    pub k: u32,
    pub n: usize,
    pub count: usize,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
}

/// Hex digest of the profile's canonical JSON.
pub fn profile_hash(profile: &ProfileFunction) -> String {
    let json = serde_json::to_string(&profile.spec()).expect("profile serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().take(8).fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn cache_dir(root: &Path, profile: &ProfileFunction, k: u32, n: usize) -> PathBuf {
    root.join(format!("{}-k{k}-n{n}", profile_hash(profile)))
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn store(dir: &Path, profile: &ProfileFunction, modes: &[JointEigenfunction]) -> Result<()> {
    let Some(first) = modes.first() else {
        return Err(EigenError::Cache("nothing to store".into()));
    };
    fs::create_dir_all(dir)?;
    let meta = CacheMeta {
        profile: profile.spec(),
        k: first.k,
        n: first.n,
        count: modes.len(),
        eigenvalues: modes.iter().map(|m| m.lambda).collect(),
    };
    let mut csv = String::from("theta");
    for i in 0..modes.len() {
        let _ = write!(csv, ",u{i}");
    }
    csv.push('\n');
    for (i, theta) in first.theta_grid().iter().enumerate() {
        let _ = write!(csv, "{theta}");
        for m in modes {
            let _ = write!(csv, ",{}", m.radial_values[i]);
        }
        csv.push('\n');
    }
    write_atomic(&dir.join("radial.csv"), &csv)?;
    let json = serde_json::to_string_pretty(&meta).map_err(|e| EigenError::Cache(e.to_string()))?;
    write_atomic(&dir.join("meta.json"), &json)?;
    Ok(())
}

pub fn load(dir: &Path) -> Result<Vec<JointEigenfunction>> {
    let meta_text = fs::read_to_string(dir.join("meta.json"))?;
    let meta: CacheMeta =
        serde_json::from_str(&meta_text).map_err(|e| EigenError::Cache(format!("meta.json: {e}")))?;
    let csv = fs::read_to_string(dir.join("radial.csv"))?;
    let mut lines = csv.lines();
    let header = lines
        .next()
        .ok_or_else(|| EigenError::Cache("radial.csv: empty file".into()))?;
    if header.split(',').count() != meta.count + 1 {
        return Err(EigenError::Cache("radial.csv: header does not match meta.json".into()));
    }
    let mut columns = vec![Vec::with_capacity(meta.n + 1); meta.count];
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != meta.count + 1 {
            return Err(EigenError::Cache(format!(
                "radial.csv line {}: expected {} fields, found {}",
                lineno + 2,
                meta.count + 1,
                fields.len()
            )));
        }
        for (col, field) in columns.iter_mut().zip(&fields[1..]) {
            let v: f64 = field.parse().map_err(|_| {
                EigenError::Cache(format!("radial.csv line {}: bad number `{field}`", lineno + 2))
            })?;
            col.push(v);
        }
    }
    if columns.iter().any(|c| c.len() != meta.n + 1) {
        return Err(EigenError::Cache("radial.csv: wrong number of rows".into()));
    }
    Ok(columns
        .into_iter()
        .zip(&meta.eigenvalues)
        .enumerate()
        .map(|(l_index, (radial_values, &lambda))| JointEigenfunction {
            k: meta.k,
            l_index,
            lambda,
            h: if lambda > 0.0 { lambda.powf(-0.5) } else { f64::INFINITY },
            n: meta.n,
            radial_values,
        })
        .collect())
}

/// Returns cached modes when at least `count` are stored, otherwise solves
/// and refreshes the cache.
pub fn load_or_solve(
    root: &Path,
    profile: &ProfileFunction,
    k: u32,
    n: usize,
    count: usize,
) -> Result<(Vec<JointEigenfunction>, CacheStatus)> {
    let dir = cache_dir(root, profile, k, n);
    if dir.join("meta.json").exists() {
        if let Ok(mut modes) = load(&dir) {
            if modes.len() >= count {
                modes.truncate(count);
                return Ok((modes, CacheStatus::Hit));
            }
        }
    }
    let modes = joint_eigenfunctions(profile, k, n, count)?;
    store(&dir, profile, &modes)?;
    Ok((modes, CacheStatus::Miss))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_round_trip_is_exact() {
        let tmp = tempfile::tempdir().unwrap();
        let s = ProfileFunction::sphere();
        let (first, status) = load_or_solve(tmp.path(), &s, 1, 256, 3).unwrap();
        assert_eq!(status, CacheStatus::Miss);
        let (second, status) = load_or_solve(tmp.path(), &s, 1, 256, 3).unwrap();
        assert_eq!(status, CacheStatus::Hit);
        assert_eq!(first, second);
        let (fewer, status) = load_or_solve(tmp.path(), &s, 1, 256, 2).unwrap();
        assert_eq!(status, CacheStatus::Hit);
        assert_eq!(fewer[..], first[..2]);
    }

    #[test]
    fn corrupt_csv_is_reported() {
        let tmp = tempfile::tempdir().unwrap();
        let s = ProfileFunction::sphere();
        let (_, _) = load_or_solve(tmp.path(), &s, 0, 256, 2).unwrap();
        let dir = cache_dir(tmp.path(), &s, 0, 256);
        let csv = fs::read_to_string(dir.join("radial.csv")).unwrap();
        let broken: String = csv.lines().take(5).map(|l| format!("{l}\n")).collect::<String>() + "0.1,oops,2\n";
        fs::write(dir.join("radial.csv"), broken).unwrap();
        let err = load(&dir).unwrap_err().to_string();
        assert!(err.contains("line 6"), "{err}");
    }

    #[test]
    fn hash_depends_on_profile() {
        let a = ProfileFunction::sphere();
        let b = crate::geometry::make_profile(crate::geometry::ProfileKind::PolynomialPerturbed, vec![1.0, 0.1])
            .unwrap();
        assert_ne!(profile_hash(&a), profile_hash(&b));
        assert_eq!(profile_hash(&a).len(), 16);
    }
}
