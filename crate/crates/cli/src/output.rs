use std::fs::{self, File};
use std::path::Path;

use anyhow::{Context, Result};
use binned_bosons::io::fmt_f64;

/// CSV writer creating parent directories; floats go through [`num`].
pub struct Csv {
    inner: csv::Writer<File>,
}

impl Csv {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        let mut inner = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        inner.write_record(header)?;
        Ok(Csv { inner })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

pub fn num(v: f64) -> String {
    fmt_f64(v)
}
