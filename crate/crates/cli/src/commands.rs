use crate::config::RunConfig;
use crate::svg::band_diagram;
use homog_core::cell_homog::compute_ahom;
use homog_core::direct::{BoundaryMode, EpsProblem};
use homog_core::experiment::{default_source, effective_nfine, run_ladder, Setup};
use homog_core::geometry::FrameworkGraph;
use homog_core::materials::ElasticTensor;
use homog_core::micro::solve_micro;
use serde_json::{json, Value};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Core(#[from] homog_core::Error),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

impl RunError {
    /// 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        use homog_core::Error as E;
        match self {
            RunError::Config(_) => 2,
            RunError::Core(
                E::UnknownPreset(_)
                | E::Parse { .. }
                | E::InvalidGraph(_)
                | E::InvalidParameter { .. }
                | E::NotAlignable(_)
                | E::NotElliptic(_)
                | E::Underresolved { .. }
                | E::Io(_),
            ) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, RunError>;

/// Default θ: 0.5 for cell computations, 0.4 where direct solves are
/// involved (ε = 1/2 needs the rods below the overlap bound).
pub fn theta_for(cfg: &RunConfig, direct: bool) -> f64 {
    cfg.theta.unwrap_or(if direct { 0.4 } else { 0.5 })
}

fn setup(cfg: &RunConfig, theta: f64) -> Result<Setup> {
    Ok(Setup {
        graph: FrameworkGraph::from_spec(&cfg.framework)?,
        a0: ElasticTensor::new(cfg.lame0, cfg.shear0)?,
        a1: ElasticTensor::new(cfg.lame1, cfg.shear1)?,
        theta,
        micro_n: cfg.n,
        modes: cfg.modes,
        macro_n: cfg.macro_n,
        macro_k: cfg.macro_k,
    })
}

fn read_spectrum(path: &str) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(homog_core::Error::Io)?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        for tok in raw.split('#').next().unwrap_or("").split([',', ' ', '\t']) {
            if tok.is_empty() {
                continue;
            }
            let v: f64 = tok.parse().map_err(|_| homog_core::Error::Parse {
                line: i + 1,
                message: format!("`{tok}` is not a number"),
            })?;
            out.push(v);
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn check_finite(v: &Value, name: &str) -> Result<()> {
    match v {
        Value::Null => Err(RunError::NonFinite(name.to_string())),
        Value::Array(a) => a.iter().try_for_each(|x| check_finite(x, name)),
        Value::Object(m) => m.values().try_for_each(|x| check_finite(x, name)),
        _ => Ok(()),
    }
}

fn write(out: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(out)
        .and_then(|_| std::fs::write(out.join(name), contents))
        .map_err(|source| RunError::Write {
            path: out.join(name).display().to_string(),
            source,
        })
}

fn emit(cfg: &RunConfig, name: &str, v: &Value) -> Result<()> {
    check_finite(v, name)?;
    let text = serde_json::to_string_pretty(v).expect("json") + "\n";
    write(&cfg.out, name, &text)?;
    println!("{}", cfg.out.join(name).display());
    Ok(())
}

fn ahom_value(cfg: &RunConfig) -> Result<Value> {
    let g = FrameworkGraph::from_spec(&cfg.framework)?;
    let a1 = ElasticTensor::new(cfg.lame1, cfg.shear1)?;
    let m = compute_ahom(&g, &a1)?;
    Ok(json!({ "voigt": m.voigt.m, "ellipticity": m.ellipticity }))
}

pub fn ahom(cfg: &RunConfig) -> Result<()> {
    emit(cfg, "ahom.json", &ahom_value(cfg)?)
}

pub fn micro(cfg: &RunConfig) -> Result<()> {
    let s = setup(cfg, theta_for(cfg, false))?;
    let p = s.micro_problem()?;
    let spec = solve_micro(&p, cfg.modes)?;
    emit(cfg, "micro.json", &serde_json::to_value(&spec.modes).expect("json"))
}

pub fn bands(cfg: &RunConfig) -> Result<()> {
    let s = setup(cfg, theta_for(cfg, false))?;
    let supplied = cfg.macro_spectrum.as_deref().map(read_spectrum).transpose()?;
    if supplied.is_none() {
        // Refuse degenerate tensors before the expensive cell solve.
        let m = s.ahom()?;
        if !m.is_elliptic() {
            return Err(homog_core::Error::NotElliptic(m.ellipticity).into());
        }
    }
    let (_, spec) = s.micro()?;
    let b = s.bands(&spec, supplied.as_deref())?;
    let v = json!({
        "gamma": b.gamma,
        "delta": b.delta,
        "alpha": b.alpha,
        "bands": b.bands,
        "gaps": b.gaps,
        "points": b.points,
        "Lambda": b.lambda,
    });
    emit(cfg, "bands.json", &v)?;
    write(&cfg.out, "bands.svg", &band_diagram(&b))?;
    println!("{}", cfg.out.join("bands.svg").display());
    Ok(())
}

pub fn solve(cfg: &RunConfig) -> Result<()> {
    let s = setup(cfg, theta_for(cfg, false))?;
    let (p, spec) = s.micro()?;
    let hom = s.homogenised(&p, &spec, default_source)?;
    let u_max = hom.u0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let v = json!({
        "modes": spec.modes.len().min(cfg.modes),
        "energy": hom.energy,
        "residual": hom.residual,
        "u0_max": u_max,
    });
    emit(cfg, "solve.json", &v)
}

pub fn direct(cfg: &RunConfig) -> Result<()> {
    let s = setup(cfg, theta_for(cfg, true))?;
    let mode: BoundaryMode = cfg.boundary.parse()?;
    let nf = effective_nfine(s.theta, cfg.eps, cfg.nfine);
    let p = EpsProblem::build(&s.graph, cfg.eps, s.theta, nf, mode, &s.a0, &s.a1)?;
    let sp = p.solve_spectrum(cfg.direct_modes)?;
    let v = json!({
        "eps": p.eps(),
        "n_fine": nf,
        "dofs": p.dofs(),
        "measure": p.total_measure(),
        "omegas": sp.omegas,
        "residuals": sp.residuals,
    });
    emit(cfg, "direct.json", &v)
}

pub fn converge(cfg: &RunConfig) -> Result<()> {
    let s = setup(cfg, theta_for(cfg, true))?;
    let mode: BoundaryMode = cfg.boundary.parse()?;
    let c = run_ladder(&s, &cfg.ladder, cfg.nfine, mode, cfg.direct_modes, default_source)?;
    let mut csv = String::from("eps,distance,energy_gap,r_fwd,r_bwd\n");
    for r in &c.rows {
        for x in [r.eps, r.distance, r.energy_gap, r.r_fwd, r.r_bwd] {
            if !x.is_finite() {
                return Err(RunError::NonFinite("converge.csv".into()));
            }
        }
        csv.push_str(&format!("{},{},{},{},{}\n", r.eps, r.distance, r.energy_gap, r.r_fwd, r.r_bwd));
    }
    write(&cfg.out, "converge.csv", &csv)?;
    println!("{}", cfg.out.join("converge.csv").display());
    Ok(())
}

pub fn report(cfg: &RunConfig) -> Result<()> {
    let theta = theta_for(cfg, true);
    let s = setup(cfg, theta)?;
    let mode: BoundaryMode = cfg.boundary.parse()?;
    let supplied = cfg.macro_spectrum.as_deref().map(read_spectrum).transpose()?;
    let (p, spec) = s.micro()?;
    let b = s.bands(&spec, supplied.as_deref())?;
    let hom = s.homogenised(&p, &spec, default_source)?;
    let c = run_ladder(&s, &cfg.ladder, cfg.nfine, mode, cfg.direct_modes, default_source)?;
    let mut echo = serde_json::to_value(cfg).expect("json");
    echo["theta"] = json!(theta);
    let v = json!({
        "config": echo,
        "config_text": cfg.to_text(theta),
        "versions": { "homog": env!("CARGO_PKG_VERSION") },
        "ahom": ahom_value(cfg)?,
        "micro": spec.truncated(cfg.modes).modes,
        "limit": {
            "gamma": b.gamma,
            "delta": b.delta,
            "alpha": b.alpha,
            "bands": b.bands,
            "gaps": b.gaps,
            "Lambda": b.lambda,
        },
        "homogenised": { "energy": hom.energy, "residual": hom.residual },
        "convergence": c.rows,
    });
    emit(cfg, "report.json", &v)
}
