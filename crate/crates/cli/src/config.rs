//! Experiment configuration files.
//!
//! A config is TOML with a mandatory top-level `seed`, an optional `out`
//! directory, a `[model]` section and a `[params]` section. Which keys are
//! required depends on the experiment kind; see the README for the schema.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    FiniteVerify,
    TwoSidedFit,
    Simulate,
    FlemingViot,
    CertifyA,
    Gradient,
    BoundaryReturn,
    Scale1d,
    DecayReport,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        Self::FiniteVerify,
        Self::TwoSidedFit,
        Self::Simulate,
        Self::FlemingViot,
        Self::CertifyA,
        Self::Gradient,
        Self::BoundaryReturn,
        Self::Scale1d,
        Self::DecayReport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::FiniteVerify => "finite-verify",
            Self::TwoSidedFit => "two-sided-fit",
            Self::Simulate => "simulate",
            Self::FlemingViot => "fleming-viot",
            Self::CertifyA => "certify-A",
            Self::Gradient => "gradient",
            Self::BoundaryReturn => "boundary-return",
            Self::Scale1d => "scale1d",
            Self::DecayReport => "decay-report",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s)).ok_or_else(|| {
            let known: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
            CliError::UnknownKind(format!("'{s}' (expected one of {})", known.join(", ")))
        })
    }
}

/// One `[section]` of the config, with the line of every key for error messages.
#[derive(Debug, Clone)]
pub struct Section {
    name: String,
    /// Line of the section header; 1 when the section is absent.
    line: usize,
    present: bool,
    table: toml::Table,
    key_lines: BTreeMap<String, usize>,
    kind: ExperimentKind,
}

fn number(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(f) => Some(*f),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn numbers(v: &toml::Value) -> Option<Vec<f64>> {
    v.as_array()?.iter().map(number).collect()
}

impl Section {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_present(&self) -> bool {
        self.present
    }

    pub fn contains(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn line_of(&self, key: &str) -> usize {
        self.key_lines.get(key).copied().unwrap_or(self.line)
    }

    /// Error anchored at `key` (or at the section header when the key is absent).
    pub fn error(&self, key: &str, message: impl Into<String>) -> CliError {
        CliError::Config { line: self.line_of(key), message: format!("[{}] {key}: {}", self.name, message.into()) }
    }

    fn missing(&self, key: &str) -> CliError {
        CliError::Config {
            line: self.line,
            message: format!("[{}] is missing `{key}`, required by {}", self.name, self.kind),
        }
    }

    /// Rejects keys outside `allowed`; typos would otherwise be ignored silently.
    pub fn only(&self, allowed: &[&str]) -> CliResult<()> {
        let known =
            |k: &str| allowed.contains(&k) || k.strip_suffix("_range").is_some_and(|b| allowed.contains(&b));
        match self.table.keys().find(|k| !known(k)) {
            Some(k) => Err(self.error(k, format!("unknown key for {}", self.kind))),
            None => Ok(()),
        }
    }

    fn get<T>(&self, key: &str, what: &str, conv: impl Fn(&toml::Value) -> Option<T>) -> CliResult<Option<T>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(v) => conv(v).map(Some).ok_or_else(|| self.error(key, format!("expected {what}"))),
        }
    }

    fn need<T>(&self, key: &str, v: Option<T>) -> CliResult<T> {
        v.ok_or_else(|| self.missing(key))
    }

    pub fn f64(&self, key: &str) -> CliResult<Option<f64>> {
        let v = self.get(key, "a number", number)?;
        if let Some(x) = v {
            if !x.is_finite() {
                return Err(self.error(key, "must be finite"));
            }
        }
        Ok(v)
    }

    pub fn req_f64(&self, key: &str) -> CliResult<f64> {
        let v = self.f64(key)?;
        self.need(key, v)
    }

    /// Optional number that must be strictly positive.
    pub fn positive(&self, key: &str) -> CliResult<Option<f64>> {
        match self.f64(key)? {
            Some(x) if x <= 0.0 => Err(self.error(key, format!("must be positive, got {x}"))),
            v => Ok(v),
        }
    }

    pub fn req_positive(&self, key: &str) -> CliResult<f64> {
        let v = self.positive(key)?;
        self.need(key, v)
    }

    pub fn u64(&self, key: &str) -> CliResult<Option<u64>> {
        self.get(key, "a nonnegative integer", |v| v.as_integer().and_then(|i| u64::try_from(i).ok()))
    }

    pub fn req_u64(&self, key: &str) -> CliResult<u64> {
        let v = self.u64(key)?;
        self.need(key, v)
    }

    /// Required positive integer.
    pub fn req_count(&self, key: &str) -> CliResult<u64> {
        match self.req_u64(key)? {
            0 => Err(self.error(key, "must be positive")),
            n => Ok(n),
        }
    }

    pub fn count_or(&self, key: &str, default: u64) -> CliResult<u64> {
        match self.u64(key)? {
            Some(0) => Err(self.error(key, "must be positive")),
            v => Ok(v.unwrap_or(default)),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> CliResult<bool> {
        Ok(self.get(key, "true or false", toml::Value::as_bool)?.unwrap_or(default))
    }

    pub fn str(&self, key: &str) -> CliResult<Option<String>> {
        self.get(key, "a string", |v| v.as_str().map(str::to_owned))
    }

    pub fn req_str(&self, key: &str) -> CliResult<String> {
        let v = self.str(key)?;
        self.need(key, v)
    }

    pub fn vec_f64(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        self.get(key, "an array of numbers", numbers)
    }

    pub fn req_vec_f64(&self, key: &str) -> CliResult<Vec<f64>> {
        let v = self.vec_f64(key)?;
        let v = self.need(key, v)?;
        if v.is_empty() {
            return Err(self.error(key, "must not be empty"));
        }
        Ok(v)
    }

    /// Required increasing list of positive times.
    pub fn req_times(&self, key: &str) -> CliResult<Vec<f64>> {
        let t = self.req_vec_f64(key)?;
        if t[0] <= 0.0 || t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(self.error(key, "times must be positive and increasing"));
        }
        Ok(t)
    }

    pub fn vec_u64(&self, key: &str) -> CliResult<Option<Vec<u64>>> {
        self.get(key, "an array of nonnegative integers", |v| {
            v.as_array()?.iter().map(|x| x.as_integer().and_then(|i| u64::try_from(i).ok())).collect()
        })
    }

    pub fn req_vec_u64(&self, key: &str) -> CliResult<Vec<u64>> {
        let v = self.vec_u64(key)?;
        self.need(key, v)
    }

    pub fn matrix(&self, key: &str) -> CliResult<Option<Vec<Vec<f64>>>> {
        self.get(key, "an array of arrays of numbers", |v| v.as_array()?.iter().map(numbers).collect())
    }

    pub fn req_matrix(&self, key: &str) -> CliResult<Vec<Vec<f64>>> {
        let v = self.matrix(key)?;
        self.need(key, v)
    }

    /// Points given either as `key = [[x, y], ...]`, as `key = [x1, x2, ...]`
    /// in one dimension, or as `key_range = [lo, hi, n]` (n evenly spaced
    /// one-dimensional points including both ends).
    pub fn points(&self, key: &str) -> CliResult<Option<Vec<Vec<f64>>>> {
        let range_key = format!("{key}_range");
        if let Some(r) = self.vec_f64(&range_key)? {
            if self.contains(key) {
                return Err(self.error(&range_key, format!("give either `{key}` or `{range_key}`, not both")));
            }
            let [lo, hi, n] = r[..] else {
                return Err(self.error(&range_key, "expected [lo, hi, count]"));
            };
            if n < 1.0 || n.fract() != 0.0 || hi < lo {
                return Err(self.error(&range_key, "need lo <= hi and a positive integer count"));
            }
            let n = n as usize;
            let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
            return Ok(Some((0..n).map(|i| vec![lo + step * i as f64]).collect()));
        }
        self.get(key, "a list of points", |v| {
            let arr = v.as_array()?;
            if arr.iter().all(|x| number(x).is_some()) {
                Some(arr.iter().map(|x| vec![number(x).expect("checked")]).collect())
            } else {
                arr.iter().map(numbers).collect()
            }
        })
    }

    pub fn req_points(&self, key: &str) -> CliResult<Vec<Vec<f64>>> {
        let v = self.points(key)?;
        let v = self.need(key, v)?;
        if v.is_empty() {
            return Err(self.error(key, "must not be empty"));
        }
        Ok(v)
    }

    /// Pairs of start points: `[[x, y], ...]` in one dimension or `[[[x...], [y...]], ...]`.
    pub fn point_pairs(&self, key: &str) -> CliResult<Option<Vec<(Vec<f64>, Vec<f64>)>>> {
        self.get(key, "a list of point pairs", |v| {
            v.as_array()?
                .iter()
                .map(|pair| {
                    let p = pair.as_array()?;
                    if p.len() != 2 {
                        return None;
                    }
                    let one = |x: &toml::Value| number(x).map(|n| vec![n]).or_else(|| numbers(x));
                    Some((one(&p[0])?, one(&p[1])?))
                })
                .collect()
        })
    }
}

/// Parsed config for one experiment kind.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub model: Section,
    pub params: Section,
    /// Directory that relative file names in the config resolve against.
    pub base_dir: PathBuf,
}

/// Line of every `key =` under every section header.
fn scan_key_lines(text: &str) -> BTreeMap<String, BTreeMap<String, usize>> {
    let mut out: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut section = String::new();
    out.insert(String::new(), BTreeMap::new());
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            if let Some(end) = rest.find(']') {
                section = rest[..end].trim().to_string();
                out.entry(section.clone()).or_default().insert(String::new(), i + 1);
            }
            continue;
        }
        if let Some((key, _)) = line.split_once('=') {
            let key = key.trim().trim_matches('"');
            if !key.is_empty() && !key.starts_with('#') {
                out.entry(section.clone()).or_default().entry(key.to_string()).or_insert(i + 1);
            }
        }
    }
    out
}

fn strip_toml_prefix(msg: &str) -> String {
    msg.lines().map(str::trim_end).collect::<Vec<_>>().join("\n")
}

impl ExperimentConfig {
    pub fn parse(text: &str, kind: ExperimentKind, base_dir: &Path) -> CliResult<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let line = e.span().map_or(1, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            CliError::Config { line, message: strip_toml_prefix(e.message()) }
        })?;
        let lines = scan_key_lines(text);
        let top = &lines[""];
        for key in table.keys() {
            if !["seed", "out", "model", "params"].contains(&key.as_str()) {
                return Err(CliError::Config {
                    line: top.get(key).copied().unwrap_or(1),
                    message: format!("unknown top-level key `{key}` (expected seed, out, [model], [params])"),
                });
            }
        }
        let seed = match table.get("seed") {
            None => {
                return Err(CliError::Config {
                    line: 1,
                    message: "missing `seed`: a master seed is mandatory so that runs are reproducible".into(),
                })
            }
            Some(v) => v.as_integer().and_then(|i| u64::try_from(i).ok()).ok_or_else(|| CliError::Config {
                line: top.get("seed").copied().unwrap_or(1),
                message: "`seed` must be a nonnegative integer".into(),
            })?,
        };
        let out = match table.get("out") {
            None => None,
            Some(v) => Some(PathBuf::from(v.as_str().ok_or_else(|| CliError::Config {
                line: top.get("out").copied().unwrap_or(1),
                message: "`out` must be a string".into(),
            })?)),
        };
        let section = |name: &str| -> CliResult<Section> {
            let keys = lines.get(name).cloned().unwrap_or_default();
            let line = keys.get("").copied().unwrap_or(1);
            let (present, table) = match table.get(name) {
                None => (false, toml::Table::new()),
                Some(toml::Value::Table(t)) => (true, t.clone()),
                Some(_) => {
                    return Err(CliError::Config {
                        line: top.get(name).copied().unwrap_or(line),
                        message: format!("`{name}` must be a [{name}] section"),
                    })
                }
            };
            Ok(Section { name: name.into(), line, present, table, key_lines: keys, kind })
        };
        Ok(Self { kind, seed, out, model: section("model")?, params: section("params")?, base_dir: base_dir.to_path_buf() })
    }

    pub fn load(path: &Path, kind: ExperimentKind) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, kind, &base).map_err(|e| e.in_file(path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, kind: ExperimentKind) -> CliResult<ExperimentConfig> {
        ExperimentConfig::parse(text, kind, Path::new("."))
    }

    #[test]
    fn kinds_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
        assert!(matches!("nope".parse::<ExperimentKind>(), Err(CliError::UnknownKind(_))));
    }

    #[test]
    fn seed_is_mandatory() {
        let e = parse("[params]\ndt = 0.1\n", ExperimentKind::Simulate).unwrap_err();
        assert!(e.to_string().contains("seed"), "{e}");
    }

    #[test]
    fn missing_param_names_the_field_and_section_line() {
        let c = parse("seed = 1\n\n[params]\nhorizon = 1.0\n", ExperimentKind::Simulate).unwrap();
        let e = c.params.req_positive("dt").unwrap_err();
        assert_eq!(e.to_string(), "line 3: [params] is missing `dt`, required by simulate");
    }

    #[test]
    fn bad_value_points_at_its_line() {
        let c = parse("seed = 1\n[params]\nhorizon = 1.0\ndt = \"small\"\n", ExperimentKind::Simulate).unwrap();
        let e = c.params.req_positive("dt").unwrap_err();
        assert!(e.to_string().starts_with("line 4: [params] dt: expected a number"), "{e}");
        let c = parse("seed = 1\n[params]\ndt = -1\n", ExperimentKind::Simulate).unwrap();
        assert!(c.params.req_positive("dt").unwrap_err().to_string().contains("must be positive"));
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let e = parse("seed = 1\n[params]\ndt = = 2\n", ExperimentKind::Simulate).unwrap_err();
        assert!(e.to_string().starts_with("line 3:"), "{e}");
    }

    #[test]
    fn points_forms() {
        let c = parse(
            "seed = 0\n[params]\na = [0.1, 0.2]\nb = [[0.1, 0.2], [0.3, 0.4]]\nc_range = [0.0, 1.0, 3]\n",
            ExperimentKind::Gradient,
        )
        .unwrap();
        assert_eq!(c.params.req_points("a").unwrap(), vec![vec![0.1], vec![0.2]]);
        assert_eq!(c.params.req_points("b").unwrap(), vec![vec![0.1, 0.2], vec![0.3, 0.4]]);
        assert_eq!(c.params.req_points("c").unwrap(), vec![vec![0.0], vec![0.5], vec![1.0]]);
        assert!(c.params.only(&["a", "b"]).unwrap_err().to_string().contains("c_range"));
    }
}
