use std::path::Path;
use std::str::FromStr;

use qenv::harness::PenaltyKind;
use qenv::PenaltySequence;

/// Penalty given on the command line, sized once the problem is known.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySpec(PenaltyKind);

impl PenaltySpec {
    pub fn build(&self, n: usize) -> Result<PenaltySequence, String> {
        self.0.build(n).map_err(|e| e.to_string())
    }
}

fn number<T: FromStr>(field: &str, what: &str) -> Result<T, String> {
    field
        .trim()
        .parse()
        .map_err(|_| format!("{what}: cannot parse {field:?}"))
}

/// `@file.json` holds either a full sequence `[1, 1, "inf"]` or a tagged
/// penalty object such as `{"kind": "capped", "mu": 2, "kmax": 20}`.
fn from_file(path: &Path) -> Result<PenaltyKind, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Ok(values) = serde_json::from_str::<PenaltySequence>(&text) {
        return Ok(PenaltyKind::Explicit { values });
    }
    serde_json::from_str(&text).map_err(|e| format!("{}: not a penalty: {e}", path.display()))
}

impl FromStr for PenaltySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(path) = s.strip_prefix('@') {
            return from_file(Path::new(path)).map(PenaltySpec);
        }
        let parts: Vec<&str> = s.split(':').collect();
        let kind = match parts.as_slice() {
            ["const", mu] => PenaltyKind::Constant { mu: number(mu, "mu")? },
            ["capped", mu, kmax] => PenaltyKind::Capped {
                mu: number(mu, "mu")?,
                kmax: number(kmax, "kmax")?,
            },
            ["fixedcard", kmax] => PenaltyKind::FixedCardinality { kmax: number(kmax, "kmax")? },
            _ => {
                return Err(format!(
                    "unknown penalty {s:?}; expected const:MU, capped:MU:KMAX, fixedcard:KMAX or @FILE"
                ))
            }
        };
        if let PenaltyKind::Constant { mu } | PenaltyKind::Capped { mu, .. } = kind {
            if !mu.is_finite() || mu < 0.0 {
                return Err(format!("mu must be finite and non-negative, got {mu}"));
            }
        }
        Ok(PenaltySpec(kind))
    }
}
