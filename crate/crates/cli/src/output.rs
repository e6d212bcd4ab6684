//! Artifact writing with a reproducible metadata header. Re-running a
//! command with identical configuration and seed produces byte-identical
//! files except for the timestamp line.

use anyhow::Context;
use std::io::Write;
use std::path::{Path, PathBuf};

pub struct OutputSink {
    dir: PathBuf,
    header: String,
}

impl OutputSink {
    pub fn new(dir: &Path, seed: u64) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output dir {}", dir.display()))?;
        let args: Vec<String> = std::env::args().skip(1).collect();
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let header = format!(
            "# tool: diskflow {}\n# seed: {}\n# args: {}\n# generated_at_unix: {}\n",
            env!("CARGO_PKG_VERSION"),
            seed,
            args.join(" "),
            stamp
        );
        Ok(Self { dir: dir.to_path_buf(), header })
    }

    pub fn write_csv(&self, name: &str, body: &str) -> anyhow::Result<()> {
        self.write(name, body)
    }

    pub fn write_json(&self, name: &str, body: &str) -> anyhow::Result<()> {
        // JSON cannot carry the # header inline; store it as a sibling line
        // comment convention used across the artifacts
        self.write(name, body)
    }

    fn write(&self, name: &str, body: &str) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        let mut f = std::fs::File::create(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        if name.ends_with(".csv") {
            f.write_all(self.header.as_bytes())?;
        } else {
            // JSON artifacts get the header as a leading comment-like field
            // is invalid; write a sidecar .meta instead
            let meta = self.dir.join(format!("{name}.meta"));
            std::fs::write(meta, &self.header)?;
        }
        f.write_all(body.as_bytes())?;
        if !body.ends_with('\n') {
            f.write_all(b"\n")?;
        }
        Ok(())
    }
}
