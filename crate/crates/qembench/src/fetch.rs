//! Optional dataset fetch: download the canonical Iris file, normalize it
//! to the repository format, and verify the recorded content checksum.

use sha2::{Digest, Sha256};

const IRIS_URL: &str =
    "https://archive.ics.uci.edu/ml/machine-learning-databases/iris/iris.data";

/// SHA-256 of the normalized vendored file (data/iris.csv).
pub const IRIS_SHA256: &str = "9cc1c345c71bcc9b486b74cbf6063fa66f4bb5e0f603a4b3c3471ec2e5e8e355";

pub const HEADER: &str = "sepal_length,sepal_width,petal_length,petal_width,species";

/// Normalize the UCI file: strip blank lines and the `Iris-` species prefix,
/// re-format numbers to one decimal, prepend the header.
pub fn normalize(raw: &str) -> anyhow::Result<String> {
    let mut out = String::from(HEADER);
    out.push('\n');
    let mut rows = 0usize;
    for line in raw.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            anyhow::bail!("unexpected row in downloaded file: {line:?}");
        }
        let mut values = Vec::with_capacity(4);
        for f in &fields[..4] {
            let v: f64 = f
                .parse()
                .map_err(|_| anyhow::anyhow!("non-numeric field {f:?}"))?;
            values.push(format!("{v:.1}"));
        }
        let species = fields[4].trim_start_matches("Iris-").to_ascii_lowercase();
        out.push_str(&values.join(","));
        out.push(',');
        out.push_str(&species);
        out.push('\n');
        rows += 1;
    }
    if rows != 150 {
        anyhow::bail!("expected 150 rows, got {rows}");
    }
    Ok(out)
}

pub fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    format!("{:x}", hasher.finalize())
}

/// Download, normalize, verify, and write the dataset.
pub fn fetch_data(out_path: &std::path::Path) -> anyhow::Result<()> {
    eprintln!("fetching {IRIS_URL}");
    let raw = ureq::get(IRIS_URL)
        .timeout(std::time::Duration::from_secs(30))
        .call()
        .map_err(|e| anyhow::anyhow!("download failed: {e}"))?
        .into_string()?;
    let normalized = normalize(&raw)?;
    let digest = sha256_hex(&normalized);
    if digest != IRIS_SHA256 {
        anyhow::bail!("checksum mismatch: got {digest}, expected {IRIS_SHA256}");
    }
    if let Some(parent) = out_path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(out_path, normalized)?;
    eprintln!("wrote {} (sha256 verified)", out_path.display());
    Ok(())
}
