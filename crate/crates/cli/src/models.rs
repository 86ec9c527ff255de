//! Model registry: turns a `[model]` section into a chain or a diffusion.

use qsd_core::diffusion::{Diffusion, DiffusionModel, Domain, Drift, ModelBounds};
use qsd_core::finite::FiniteAbsorbedChain;
use qsd_core::BinGrid;

use crate::config::{ExperimentConfig, Section};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub enum Model {
    Chain(FiniteAbsorbedChain),
    Diffusion(DiffusionModel),
}

const CHAIN_KEYS: &[&str] = &["type", "rows", "file"];
const DIFFUSION_KEYS: &[&str] = &[
    "type",
    "domain",
    "interval",
    "lo",
    "hi",
    "center",
    "radius",
    "drift",
    "drift_vector",
    "drift_matrix",
    "drift_offset",
    "diffusion",
    "sigma",
    "base",
    "amplitude",
    "exponent",
    "intercept",
    "slope",
    "sigma_matrix",
    "sigma_lower_sq",
    "sigma_upper_sq",
    "drift_bound",
];

fn core_at<'a>(section: &'a Section, key: &str) -> impl FnOnce(qsd_core::Error) -> CliError + 'a {
    let key = key.to_string();
    move |e| section.error(&key, e.to_string())
}

fn chain(section: &Section, cfg: &ExperimentConfig) -> CliResult<FiniteAbsorbedChain> {
    section.only(CHAIN_KEYS)?;
    match (section.matrix("rows")?, section.str("file")?) {
        (Some(rows), None) => FiniteAbsorbedChain::from_rows(&rows).map_err(core_at(section, "rows")),
        (None, Some(file)) => {
            let path = cfg.base_dir.join(&file);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
            FiniteAbsorbedChain::parse(&text).map_err(|e| match e {
                qsd_core::Error::Parse { line, message } => {
                    CliError::InFile { path, source: Box::new(CliError::Config { line, message }) }
                }
                other => section.error("file", other.to_string()),
            })
        }
        (Some(_), Some(_)) => Err(section.error("file", "give either `rows` or `file`, not both")),
        (None, None) => Err(section.error("type", "a chain needs `rows` or `file`")),
    }
}

fn domain(section: &Section) -> CliResult<Domain> {
    let kind = section.req_str("domain")?;
    let d = match kind.as_str() {
        "interval" => {
            let iv = section.req_vec_f64("interval")?;
            let [a, b] = iv[..] else {
                return Err(section.error("interval", "expected [a, b]"));
            };
            Domain::interval(a, b).map_err(core_at(section, "interval"))?
        }
        "box" => Domain::boxed(section.req_vec_f64("lo")?, section.req_vec_f64("hi")?).map_err(core_at(section, "lo"))?,
        "ball" => Domain::ball(section.req_vec_f64("center")?, section.req_positive("radius")?)
            .map_err(core_at(section, "center"))?,
        other => return Err(section.error("domain", format!("unknown domain '{other}' (interval, box, ball)"))),
    };
    Ok(d)
}

fn drift(section: &Section) -> CliResult<Drift> {
    let kind = section.str("drift")?.unwrap_or_else(|| "zero".into());
    Ok(match kind.as_str() {
        "zero" => Drift::Zero,
        "constant" => Drift::Constant(section.req_vec_f64("drift_vector")?),
        "linear" => Drift::Linear { matrix: section.req_matrix("drift_matrix")?, offset: section.req_vec_f64("drift_offset")? },
        other => return Err(section.error("drift", format!("unknown drift '{other}' (zero, constant, linear)"))),
    })
}

fn diffusion(section: &Section) -> CliResult<Diffusion> {
    let kind = section.str("diffusion")?.unwrap_or_else(|| "isotropic".into());
    Ok(match kind.as_str() {
        "isotropic" => Diffusion::Isotropic(section.f64("sigma")?.unwrap_or(1.0)),
        "diagonal-holder" => Diffusion::DiagonalHolder {
            base: section.req_vec_f64("base")?,
            amplitude: section.req_vec_f64("amplitude")?,
            exponent: section.req_positive("exponent")?,
        },
        "affine" => Diffusion::Affine1d { intercept: section.req_f64("intercept")?, slope: section.req_f64("slope")? },
        "matrix" => Diffusion::Matrix(section.req_matrix("sigma_matrix")?),
        other => {
            return Err(section.error(
                "diffusion",
                format!("unknown diffusion '{other}' (isotropic, diagonal-holder, affine, matrix)"),
            ))
        }
    })
}

fn diffusion_model(section: &Section) -> CliResult<DiffusionModel> {
    section.only(DIFFUSION_KEYS)?;
    let model = DiffusionModel::new(domain(section)?, drift(section)?, diffusion(section)?)
        .map_err(core_at(section, "diffusion"))?;
    let declared = [section.positive("sigma_lower_sq")?, section.positive("sigma_upper_sq")?, section.f64("drift_bound")?];
    match declared {
        [None, None, None] => Ok(model),
        [Some(lo), Some(hi), Some(b)] => Ok(model.with_bounds(ModelBounds { sigma_lower_sq: lo, sigma_upper_sq: hi, drift_bound: b })),
        _ => Err(section.error("sigma_lower_sq", "declare all of sigma_lower_sq, sigma_upper_sq and drift_bound, or none")),
    }
}

/// Resolves the `[model]` section.
pub fn build_model(cfg: &ExperimentConfig) -> CliResult<Model> {
    let section = &cfg.model;
    if !section.is_present() {
        return Err(CliError::Config { line: 1, message: format!("{} needs a [model] section", cfg.kind) });
    }
    match section.req_str("type")?.as_str() {
        "chain" => Ok(Model::Chain(chain(section, cfg)?)),
        "diffusion" => Ok(Model::Diffusion(diffusion_model(section)?)),
        other => Err(section.error("type", format!("unknown model type '{other}' (chain, diffusion)"))),
    }
}

pub fn require_diffusion(cfg: &ExperimentConfig) -> CliResult<DiffusionModel> {
    match build_model(cfg)? {
        Model::Diffusion(m) => Ok(m),
        Model::Chain(_) => Err(cfg.model.error("type", format!("{} needs a diffusion model", cfg.kind))),
    }
}

pub fn require_chain(cfg: &ExperimentConfig) -> CliResult<FiniteAbsorbedChain> {
    match build_model(cfg)? {
        Model::Chain(c) => Ok(c),
        Model::Diffusion(_) => Err(cfg.model.error("type", format!("{} needs a finite chain", cfg.kind))),
    }
}

/// `bins = n` on intervals, `bins = [n1, ..., nd]` on the bounding box otherwise.
pub fn bin_grid(params: &Section, domain: &Domain) -> CliResult<BinGrid> {
    let (lo, hi) = domain.bounding_box();
    let counts: Vec<usize> = match params.u64("bins") {
        Ok(Some(n)) => vec![n as usize; lo.len()],
        _ => params.req_vec_u64("bins")?.into_iter().map(|n| n as usize).collect(),
    };
    if counts.len() != lo.len() || counts.contains(&0) {
        return Err(params.error("bins", format!("need {} positive bin counts", lo.len())));
    }
    BinGrid::new(lo, hi, counts).map_err(|e| params.error("bins", e.to_string()))
}
