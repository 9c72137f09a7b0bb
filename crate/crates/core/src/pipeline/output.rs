use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::manifest::FileDigest;

/// Output files of one stage, staged in a temporary directory under the
/// output root and moved into `<out>/<stage>` only when the stage succeeds.
pub struct StageDir {
    tmp: tempfile::TempDir,
    target: PathBuf,
    files: Vec<String>,
}

impl StageDir {
    pub fn new(out: &Path, stage: &str) -> Result<Self> {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        let tmp = tempfile::Builder::new()
            .prefix(&format!(".{stage}-"))
            .tempdir_in(out)
            .map_err(|e| Error::io(out, e))?;
        Ok(StageDir {
            tmp,
            target: out.join(stage),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let p = self.tmp.path().join(name);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
        self.files.push(name.to_owned());
        Ok(())
    }

    /// Path a file will have once committed.
    pub fn final_path(&self, name: &str) -> PathBuf {
        self.target.join(name)
    }

    /// Replace `<out>/<stage>` with the staged files and return their digests.
    pub fn commit(self) -> Result<Vec<FileDigest>> {
        let staged = self.tmp.keep();
        if self.target.exists() {
            fs::remove_dir_all(&self.target).map_err(|e| Error::io(&self.target, e))?;
        }
        fs::rename(&staged, &self.target).map_err(|e| Error::io(&self.target, e))?;
        let mut files = self.files;
        files.sort();
        files.dedup();
        files.iter().map(|f| FileDigest::of(&self.target.join(f))).collect()
    }
}

/// Float formatting used in every table: shortest round-trip form.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else {
        format!("{v}")
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "NA".into())
}

/// CSV bytes for a header and rows.
pub fn csv_table<I>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        debug_assert_eq!(r.len(), header.len());
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}
