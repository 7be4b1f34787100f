//! Result directories: every file is written through a temporary name and
//! renamed into place, and `result.json` carries SHA-256 digests of the others.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use defchoice::choice::{ChoiceResult, PieceInfo};
use defchoice::evalhaus::{PointCloud, SampleBox};
use defchoice::exact::rational::{fmt_rational, parse_rational};
use defchoice::formula::{formula_from_json, formula_to_json, Diagram};
use defchoice::verify::Report;
use defchoice::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Significant digits of the plot CSVs.
pub const CSV_DIGITS: usize = 12;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().and_then(|s| s.to_str()).ok_or_else(|| Error::Invalid(format!("bad output path {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Appends a timestamped line to the `run.log` sidecar; the only file whose
/// content depends on the wall clock.
pub fn log_line(dir: &Path, line: &str) -> Result<()> {
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut f = fs::OpenOptions::new().create(true).append(true).open(dir.join("run.log"))?;
    writeln!(f, "{ts} {line}")?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StoredMap {
    pub components: Vec<String>,
    pub lipschitz: f64,
    pub lipschitz_step: f64,
    pub big_l: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StoredResult {
    pub n: usize,
    pub ell: usize,
    pub epsilon: f64,
    pub rho: String,
    pub degree: u32,
    pub diagram: Diagram,
    pub claimed: Diagram,
    pub pass: bool,
    pub pieces: Vec<PieceInfo>,
    pub sample_box: SampleBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<StoredMap>,
    /// File name to SHA-256 of its bytes.
    pub digests: BTreeMap<String, String>,
}

/// Files of a result directory, written in a fixed order.
pub struct Bundle {
    files: Vec<(String, Vec<u8>)>,
}

impl Bundle {
    pub fn new() -> Self {
        Bundle { files: Vec::new() }
    }

    pub fn add(&mut self, name: &str, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), bytes.into()));
    }

    pub fn add_json(&mut self, name: &str, v: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(v)?;
        text.push('\n');
        self.add(name, text);
        Ok(())
    }

    pub fn digests(&self) -> BTreeMap<String, String> {
        self.files.iter().map(|(n, b)| (n.clone(), sha256_hex(b))).collect()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            write_atomic(&dir.join(name), bytes)?;
        }
        Ok(())
    }
}

pub fn save_choice(dir: &Path, r: &ChoiceResult, spec_json: &serde_json::Value) -> Result<()> {
    let mut b = Bundle::new();
    b.add_json("spec.json", spec_json)?;
    b.add_json("formula.json", &formula_to_json(&r.formula))?;
    b.add("formula.txt", format!("{}\n", r.formula));
    b.add("input.csv", r.input.to_csv(CSV_DIGITS));
    b.add("output.csv", r.output.to_csv(CSV_DIGITS));
    b.add("projection.csv", r.projection.to_csv(CSV_DIGITS));
    if let Some(m) = &r.map {
        b.add("domain.csv", m.domain.to_csv(CSV_DIGITS));
        b.add("choice.csv", m.choice.to_csv(CSV_DIGITS));
    }
    b.add_json("report.json", &r.metrics)?;
    let stored = StoredResult {
        n: r.n(),
        ell: r.ell,
        epsilon: r.eps,
        rho: fmt_rational(&r.rho),
        degree: r.degree,
        diagram: r.diagram,
        claimed: r.claimed,
        pass: r.metrics.pass,
        pieces: r.pieces.clone(),
        sample_box: r.sample_box.clone(),
        map: r.map.as_ref().map(|m| StoredMap {
            components: m.components.iter().map(|p| p.to_string()).collect(),
            lipschitz: m.lipschitz,
            lipschitz_step: m.lipschitz_step,
            big_l: m.big_l,
        }),
        digests: b.digests(),
    };
    b.add_json("result.json", &stored)?;
    b.write(dir)
}

fn read(dir: &Path, name: &str) -> Result<Vec<u8>> {
    fs::read(dir.join(name)).map_err(|e| Error::Invalid(format!("{}: {e}", dir.join(name).display())))
}

fn read_text(dir: &Path, name: &str, stored: &StoredResult) -> Result<String> {
    let bytes = read(dir, name)?;
    let want = stored.digests.get(name).ok_or_else(|| Error::Invalid(format!("result.json has no digest for {name}")))?;
    let got = sha256_hex(&bytes);
    if &got != want {
        return Err(Error::Invalid(format!("digest mismatch for {name}: stored {want}, found {got}")));
    }
    String::from_utf8(bytes).map_err(|_| Error::Invalid(format!("{name} is not UTF-8")))
}

/// Loads a result directory, checking every digest. The map information is
/// left empty; the caller rebuilds it from the problem.
pub fn load_choice(dir: &Path) -> Result<(ChoiceResult, StoredResult)> {
    let stored: StoredResult = serde_json::from_slice(&read(dir, "result.json")?)?;
    for name in stored.digests.keys() {
        read_text(dir, name, &stored)?;
    }
    let formula = formula_from_json(&serde_json::from_str(&read_text(dir, "formula.json", &stored)?)?)?;
    let cloud = |name: &str| -> Result<PointCloud> { PointCloud::from_csv(&read_text(dir, name, &stored)?) };
    let metrics: Report = serde_json::from_str(&read_text(dir, "report.json", &stored)?)?;
    let result = ChoiceResult {
        formula,
        ell: stored.ell,
        eps: stored.epsilon,
        rho: parse_rational(&stored.rho)?,
        degree: stored.degree,
        diagram: stored.diagram,
        claimed: stored.claimed,
        pieces: stored.pieces.clone(),
        sample_box: stored.sample_box.clone(),
        input: cloud("input.csv")?,
        output: cloud("output.csv")?,
        projection: cloud("projection.csv")?,
        metrics,
        map: None,
    };
    if result.formula.ctx().n != stored.n || result.output.n != stored.n {
        return Err(Error::Invalid("stored dimension disagrees with the formula or cloud".into()));
    }
    Ok((result, stored))
}
