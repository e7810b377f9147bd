use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use mfqvar::config::{ModelConfig, ModelSection, SamplerSection, CONFIG_VERSION};
use mfqvar::data::{
    assemble_panel, classify_nowcast, read_vintage_rows, select_vintage, validate_inputs, write_vintage_csv,
    Frequency, MixedFrequencyPanel, NowcastLabel, SeriesSpec, Transformation, ValidationIssue, ValidationReport,
    VintageRow, YearMonth,
};
use mfqvar::gibbs::{diagnostics, run_chains, PosteriorChain};
use mfqvar::model::{QuantileConfig, QvarParams};
use mfqvar::nowcast::{
    counterfactual, miniature_dataset, nowcast, percentile_spread, rolling_report, simulate_dgp,
    write_difference_table, write_nowcast_table, write_rolling_table, write_spread_table, CounterfactualResult,
    CounterfactualSpec, MissingTemplate, NowcastResult, SyntheticDgp, MINIATURE_SEED,
};
use mfqvar::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::args::{Cli, Command, CounterfactualArgs, FitArgs, InputArgs, NowcastArgs, Preset, SamplerArgs, SimulateArgs};
use crate::manifest::{file_digest, Manifest};

pub const MINIATURE_CONFIG: &str = include_str!("../../../data/miniature/config.toml");

const OUTPUT_ROOT_VAR: &str = "MFQVAR_OUTPUT_ROOT";

pub fn run(cli: &Cli) -> Result<()> {
    let out = match &cli.out {
        Some(dir) => dir.clone(),
        None => std::env::var_os(OUTPUT_ROOT_VAR)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("mfqvar-out"))
            .join(cli.command.name()),
    };
    prepare_out(&out)?;
    match &cli.command {
        Command::Validate(a) => cmd_validate(a, &out),
        Command::Fit(a) => cmd_fit(a, &out),
        Command::Nowcast(a) => cmd_nowcast(a, &out),
        Command::Counterfactual(a) => cmd_counterfactual(a, &out),
        Command::Simulate(a) => cmd_simulate(a, &out),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io { path: path.to_path_buf(), source: e }
}

/// Creates `dir`, clearing the files of an earlier run recorded in its
/// manifest. Refuses a non-empty directory without one.
fn prepare_out(dir: &Path) -> Result<()> {
    let manifest = dir.join("manifest.json");
    if manifest.exists() {
        for f in Manifest::load(&manifest)?.files {
            let path = dir.join(&f.path);
            if path.exists() {
                fs::remove_file(&path).map_err(io_err(&path))?;
            }
        }
        fs::remove_file(&manifest).map_err(io_err(&manifest))?;
    } else if dir.is_dir() && fs::read_dir(dir).map_err(io_err(dir))?.next().is_some() {
        return Err(Error::Spec(format!("output directory {} is not empty and holds no manifest", dir.display())));
    }
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("output serialises");
    fs::write(path, text + "\n").map_err(io_err(path))
}

struct Inputs {
    cfg: ModelConfig,
    rows: Vec<VintageRow>,
    data_digest: String,
    origins: Vec<YearMonth>,
}

fn apply_overrides(cfg: &mut ModelConfig, s: &SamplerArgs) -> Result<()> {
    if let Some(seed) = s.seed {
        cfg.sampler.seed = seed;
    }
    if let Some(d) = s.draws {
        cfg.sampler.draws = d;
    }
    if let Some(b) = s.burnin {
        cfg.sampler.burn_in = b;
    }
    if let Some(c) = s.chains {
        cfg.sampler.chains = c;
    }
    cfg.validate()
}

/// Latest month with a monthly observation.
fn default_origin(rows: &[VintageRow], specs: &[SeriesSpec]) -> Result<YearMonth> {
    rows.iter()
        .filter(|r| r.value.is_some())
        .filter(|r| specs.iter().any(|s| s.id == r.series_id && s.frequency == Frequency::Monthly))
        .map(|r| YearMonth::from_date(r.date))
        .max()
        .ok_or_else(|| Error::Data("no monthly observations to place an origin".into()))
}

fn load_inputs(input: &InputArgs, sampler: &SamplerArgs) -> Result<Inputs> {
    let mut cfg = ModelConfig::load(&input.config)?;
    apply_overrides(&mut cfg, sampler)?;
    let rows = read_vintage_rows(&input.data)?;
    let origins = match input.origin {
        Some(o) => o.months(),
        None => vec![default_origin(&rows, &cfg.series)?],
    };
    Ok(Inputs { data_digest: file_digest(&input.data)?, cfg, rows, origins })
}

fn panel_at(inputs: &Inputs, origin: YearMonth) -> Result<MixedFrequencyPanel> {
    let raw = select_vintage(&inputs.rows, &inputs.cfg.series, origin.last_day())?;
    assemble_panel(&raw, origin, &inputs.cfg.series, &inputs.cfg.panel_options())
}

fn tau_label(tau: &[f64]) -> String {
    if tau.iter().all(|t| *t == tau[0]) {
        tau[0].to_string()
    } else {
        tau.iter().map(f64::to_string).collect::<Vec<_>>().join("-")
    }
}

/// One run per `--tau` value, or the configuration's levels.
fn tau_runs(cfg: &ModelConfig, taus: &[f64]) -> Result<Vec<(String, QuantileConfig)>> {
    if taus.is_empty() {
        let q = cfg.quantiles()?;
        return Ok(vec![(tau_label(q.tau()), q)]);
    }
    taus.iter().map(|&t| Ok((tau_label(&[t]), QuantileConfig::uniform(t, cfg.n())?))).collect()
}

fn fit_panel(cfg: &ModelConfig, panel: &MixedFrequencyPanel, q: &QuantileConfig) -> Result<Vec<PosteriorChain>> {
    let prior = cfg.prior(panel)?;
    run_chains(panel, q, &prior, &cfg.sampler_settings(), cfg.sampler.chains)
}

fn base_manifest(command: &str, input: &InputArgs, inputs: &Inputs, taus: &[(String, QuantileConfig)]) -> Manifest {
    let mut m = Manifest::new(command);
    m.config_digest = Some(inputs.cfg.digest());
    m.data_digest = Some(inputs.data_digest.clone());
    m.seed = Some(inputs.cfg.sampler.seed);
    m.arg("data", input.data.display().to_string());
    m.arg("config", input.config.display().to_string());
    m.arg("origins", inputs.origins.iter().map(ToString::to_string).collect::<Vec<_>>());
    m.arg("tau", taus.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>());
    m.arg("draws", inputs.cfg.sampler.draws);
    m.arg("burnin", inputs.cfg.sampler.burn_in);
    m.arg("chains", inputs.cfg.sampler.chains);
    m
}

fn cmd_validate(a: &InputArgs, out: &Path) -> Result<()> {
    let cfg = ModelConfig::load(&a.config)?;
    let origins = match (a.origin, read_vintage_rows(&a.data)) {
        (Some(o), _) => o.months(),
        (None, Ok(rows)) => vec![default_origin(&rows, &cfg.series)?],
        (None, Err(e)) => {
            // no origin without a readable file; report the schema failure
            let report = ValidationReport {
                origin: YearMonth { year: 1970, month: 1 },
                issues: vec![ValidationIssue::from_error(e)],
                class: None,
            };
            return finish_validation(a, &cfg, vec![report], out);
        }
    };
    let reports = origins.iter().map(|o| validate_inputs(&a.data, &cfg.series, *o, &cfg.panel_options())).collect();
    finish_validation(a, &cfg, reports, out)
}

fn finish_validation(a: &InputArgs, cfg: &ModelConfig, reports: Vec<ValidationReport>, out: &Path) -> Result<()> {
    let mut issues = 0;
    for r in &reports {
        for i in &r.issues {
            eprintln!("{:?}: {}", i.kind, i.message);
        }
        issues += r.issues.len();
        if let Some(c) = r.class {
            println!("{}: ok ({})", r.origin, c.label);
        }
    }
    write_json(&out.join("validation.json"), &reports)?;
    let mut m = Manifest::new("validate");
    m.config_digest = Some(cfg.digest());
    m.data_digest = file_digest(&a.data).ok();
    m.arg("data", a.data.display().to_string());
    m.arg("config", a.config.display().to_string());
    m.arg("issues", issues);
    m.write(out)?;
    if issues > 0 {
        return Err(Error::Data(format!("{issues} validation issue(s)")));
    }
    Ok(())
}

fn single_origin(inputs: &Inputs) -> Result<YearMonth> {
    match inputs.origins.as_slice() {
        [o] => Ok(*o),
        _ => Err(Error::Spec("this command takes a single origin".into())),
    }
}

fn cmd_fit(a: &FitArgs, out: &Path) -> Result<()> {
    let inputs = load_inputs(&a.input, &a.sampler)?;
    let origin = single_origin(&inputs)?;
    let panel = panel_at(&inputs, origin)?;
    let class = classify_nowcast(&panel)?;
    let runs = tau_runs(&inputs.cfg, &a.sampler.tau)?;
    for (label, q) in &runs {
        let dir = out.join(format!("tau-{label}"));
        let chains = fit_panel(&inputs.cfg, &panel, q)?;
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        for c in &chains {
            let i = c.header.chain_index;
            c.save(&dir.join(format!("chain-{i}.bin")))?;
            c.write_csv(create(&dir.join(format!("chain-{i}.csv")))?)?;
        }
        write_diagnostics(&chains, &dir.join("diagnostics.csv"))?;
        println!("{origin} tau {label}: {} chain(s) x {} draws ({})", chains.len(), inputs.cfg.sampler.draws, class.label);
    }
    let mut m = base_manifest("fit", &a.input, &inputs, &runs);
    m.arg("class", class.label.heading());
    m.write(out)
}

fn write_diagnostics(chains: &[PosteriorChain], path: &Path) -> Result<()> {
    if chains.first().is_some_and(|c| c.draws() < 2) {
        return Ok(());
    }
    let d = diagnostics(chains)?;
    let low: Vec<&str> = d.parameters.iter().filter(|p| p.low_ess).map(|p| p.name.as_str()).collect();
    if !low.is_empty() {
        log::warn!("{} parameter(s) with effective sample size below 10, e.g. {}", low.len(), low[0]);
    }
    let mut w = create(path)?;
    use std::io::Write;
    writeln!(w, "parameter,mean,sd,q05,q50,q95,ess,rhat,low_ess").map_err(io_err(path))?;
    for p in &d.parameters {
        writeln!(
            w,
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{}",
            p.name, p.mean, p.sd, p.q05, p.q50, p.q95, p.ess, p.rhat, p.low_ess
        )
        .map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Chains from an earlier `fit`, one entry per `tau-*` directory.
fn load_fit(dir: &Path) -> Result<Vec<(String, Vec<PosteriorChain>)>> {
    let mut runs = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let Some(label) = path.file_name().and_then(|n| n.to_str()).and_then(|n| n.strip_prefix("tau-")) else {
            continue;
        };
        let mut chains = Vec::new();
        for c in 0.. {
            let file = path.join(format!("chain-{c}.bin"));
            if !file.exists() {
                break;
            }
            chains.push(PosteriorChain::load(&file)?);
        }
        if chains.is_empty() {
            return Err(Error::Format(format!("{} holds no chains", path.display())));
        }
        runs.insert(label.to_string(), chains);
    }
    if runs.is_empty() {
        return Err(Error::Format(format!("{} holds no fitted runs", dir.display())));
    }
    Ok(runs.into_iter().collect())
}

#[derive(Serialize)]
struct Report<'a, T> {
    config_digest: String,
    seed: u64,
    results: &'a [T],
}

fn cmd_nowcast(a: &NowcastArgs, out: &Path) -> Result<()> {
    let inputs = load_inputs(&a.input, &a.sampler)?;
    let opts = inputs.cfg.nowcast_options();
    let panels: Vec<MixedFrequencyPanel> = inputs.origins.iter().map(|o| panel_at(&inputs, *o)).collect::<Result<_>>()?;
    let mut results: Vec<(String, Vec<NowcastResult>)> = Vec::new();
    let runs;
    match &a.fit {
        Some(dir) => {
            let panel = &panels[0];
            single_origin(&inputs)?;
            let class = classify_nowcast(panel)?;
            let fitted = load_fit(dir)?;
            runs = fitted
                .iter()
                .map(|(l, c)| Ok((l.clone(), QuantileConfig::new(&c[0].header.tau)?)))
                .collect::<Result<Vec<_>>>()?;
            for (label, chains) in &fitted {
                results.push((label.clone(), vec![nowcast(chains, panel, class, &opts)?]));
            }
        }
        None => {
            runs = tau_runs(&inputs.cfg, &a.sampler.tau)?;
            for (label, q) in &runs {
                let mut per_origin = Vec::new();
                for panel in &panels {
                    let class = classify_nowcast(panel)?;
                    let chains = fit_panel(&inputs.cfg, panel, q)?;
                    per_origin.push(nowcast(&chains, panel, class, &opts)?);
                }
                results.push((label.clone(), per_origin));
            }
        }
    }
    for (label, rs) in &results {
        write_nowcast_table(rs, create(&out.join(format!("nowcast-tau-{label}.csv")))?)?;
        let report = Report { config_digest: inputs.cfg.digest(), seed: inputs.cfg.sampler.seed, results: rs };
        write_json(&out.join(format!("nowcast-tau-{label}.json")), &report)?;
        write_plot_data(rs, &out.join(format!("plot-tau-{label}.csv")))?;
        for r in rs {
            let h = r.headline();
            println!("{} {} tau {label}: {:.3} [{:.3}, {:.3}]", r.origin, r.class.label, h.mean, h.lower, h.upper);
        }
    }
    let uniform = |t: f64| results.iter().find(|(_, rs)| rs[0].tau.iter().all(|x| *x == t)).map(|(_, rs)| rs.as_slice());
    if let (Some(lo), Some(mid), Some(hi)) = (uniform(0.1), uniform(0.5), uniform(0.9)) {
        write_spread_table(&percentile_spread(lo, mid, hi)?, create(&out.join("percentile-spread.csv"))?)?;
    }
    if inputs.origins.len() >= 4 {
        let all: Vec<NowcastResult> = results.iter().flat_map(|(_, rs)| rs.iter().cloned()).collect();
        write_rolling_table(&rolling_report(&all)?, create(&out.join("rolling.csv"))?)?;
    }
    let mut m = base_manifest("nowcast", &a.input, &inputs, &runs);
    if let Some(dir) = &a.fit {
        m.arg("fit", dir.display().to_string());
    }
    m.arg(
        "classes",
        panels.iter().map(|p| classify_nowcast(p).map(|c| c.label.heading())).collect::<Result<Vec<_>>>()?,
    );
    m.write(out)
}

/// Headline series for plotting: one point per origin.
fn write_plot_data(results: &[NowcastResult], path: &Path) -> Result<()> {
    use std::io::Write;
    let mut w = create(path)?;
    writeln!(w, "x,y,lower,upper,class,month").map_err(io_err(path))?;
    for r in results {
        let h = r.headline();
        writeln!(w, "{},{:?},{:?},{:?},{},{}", r.origin, h.mean, h.lower, h.upper, r.class.label, h.month)
            .map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn class_slug(label: NowcastLabel) -> &'static str {
    match label {
        NowcastLabel::Forecast => "forecast",
        NowcastLabel::NowcastT1 => "nowcast-t1",
        NowcastLabel::NowcastT2 => "nowcast-t2",
    }
}

fn cmd_counterfactual(a: &CounterfactualArgs, out: &Path) -> Result<()> {
    let inputs = load_inputs(&a.input, &a.sampler)?;
    let opts = inputs.cfg.nowcast_options();
    let spec = CounterfactualSpec {
        shocked_series: a.shock_series.clone(),
        window: a.shock_window,
        shock_size: a.shock_size,
    };
    if inputs.cfg.series.iter().all(|s| s.id != spec.shocked_series) {
        return Err(Error::Spec(format!("unknown series '{}'", spec.shocked_series)));
    }
    let runs = tau_runs(&inputs.cfg, &a.sampler.tau)?;
    let mut all: Vec<(String, f64, CounterfactualResult)> = Vec::new();
    for (label, q) in &runs {
        for origin in &inputs.origins {
            let panel = panel_at(&inputs, *origin)?;
            let r = counterfactual(|p: &MixedFrequencyPanel| fit_panel(&inputs.cfg, p, q), &panel, &spec, &opts)?;
            let h = r.headline();
            println!(
                "{} {} tau {label}: difference {:.3} [{:.3}, {:.3}], P(<0) = {:.2}",
                origin, r.actual.class.label, h.mean, h.lower, h.upper, h.prob_negative
            );
            all.push((label.clone(), q.tau()[0], r));
        }
    }
    write_counterfactual_rows(all.iter(), &out.join("counterfactual.csv"))?;
    for label in NowcastLabel::ALL {
        let rows: Vec<_> = all.iter().filter(|(_, _, r)| r.actual.class.label == label).collect();
        if !rows.is_empty() {
            write_counterfactual_rows(rows.into_iter(), &out.join(format!("differences-{}.csv", class_slug(label))))?;
        }
    }
    // average headline difference per τ and class
    let mut taus: Vec<f64> = Vec::new();
    let mut cells: Vec<[Option<f64>; 3]> = Vec::new();
    for (label, _) in &runs {
        let mine: Vec<_> = all.iter().filter(|(l, _, _)| l == label).collect();
        taus.push(mine[0].1);
        let mut row = [None; 3];
        for (c, cls) in NowcastLabel::ALL.iter().enumerate() {
            let v: Vec<f64> =
                mine.iter().filter(|(_, _, r)| r.actual.class.label == *cls).map(|(_, _, r)| r.headline().mean).collect();
            if !v.is_empty() {
                row[c] = Some(v.iter().sum::<f64>() / v.len() as f64);
            }
        }
        cells.push(row);
    }
    write_difference_table(&taus, &cells, create(&out.join("counterfactual-summary.csv"))?)?;
    let results: Vec<&CounterfactualResult> = all.iter().map(|(_, _, r)| r).collect();
    let report = Report { config_digest: inputs.cfg.digest(), seed: inputs.cfg.sampler.seed, results: &results };
    write_json(&out.join("counterfactual.json"), &report)?;
    let mut m = base_manifest("counterfactual", &a.input, &inputs, &runs);
    m.arg("shock_series", &spec.shocked_series);
    m.arg("shock_size", spec.shock_size);
    m.arg("shock_window", spec.window);
    m.write(out)
}

fn write_counterfactual_rows<'a>(
    rows: impl Iterator<Item = &'a (String, f64, CounterfactualResult)>,
    path: &Path,
) -> Result<()> {
    use std::io::Write;
    let mut w = create(path)?;
    writeln!(w, "tau,origin,class,month,offset,variant,actual,counterfactual,difference,lower,upper,prob_negative")
        .map_err(io_err(path))?;
    for (label, _, r) in rows {
        for ((d, sa), sc) in r.differences.iter().zip(&r.actual.summaries).zip(&r.counterfactual.summaries) {
            writeln!(
                w,
                "{label},{},{},{},{},{},{:?},{:?},{:?},{:?},{:?},{:?}",
                r.actual.origin,
                r.actual.class.label,
                sa.month,
                d.offset,
                d.variant.name(),
                sa.mean,
                sc.mean,
                d.mean,
                d.lower,
                d.upper,
                d.prob_negative
            )
            .map_err(io_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Data-generating process read by `simulate --dgp`. Matrices are row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpFile {
    pub b0: Vec<f64>,
    pub lags: Vec<Vec<Vec<f64>>>,
    pub sigma: Vec<Vec<f64>>,
    pub tau: Vec<f64>,
    pub months: usize,
    #[serde(default)]
    pub quarterly: Vec<usize>,
    #[serde(default)]
    pub publication_lags: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub start: Option<YearMonth>,
}

fn matrix(rows: &[Vec<f64>], n: usize, what: &str) -> Result<nalgebra::DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension(format!("{what} must be {n}x{n}")));
    }
    Ok(nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl DgpFile {
    fn into_dgp(self, seed: Option<u64>) -> Result<SyntheticDgp> {
        let n = self.b0.len();
        let lags = self.lags.iter().map(|l| matrix(l, n, "every lag matrix")).collect::<Result<_>>()?;
        let params = QvarParams::new(nalgebra::DVector::from_vec(self.b0), lags, matrix(&self.sigma, n, "sigma")?)?;
        let q = match self.tau.as_slice() {
            [t] => QuantileConfig::uniform(*t, n)?,
            ts => QuantileConfig::new(ts)?,
        };
        let lags = if self.publication_lags.is_empty() { vec![0; n] } else { self.publication_lags };
        let template = MissingTemplate { quarterly: self.quarterly, publication_lags: lags };
        let mut dgp = SyntheticDgp::new(params, q, self.months, template, seed.unwrap_or(self.seed))?;
        if let Some(s) = self.start {
            dgp.start = s;
        }
        Ok(dgp)
    }
}

fn cmd_simulate(a: &SimulateArgs, out: &Path) -> Result<()> {
    let mut m = Manifest::new("simulate");
    match (a.preset, &a.dgp) {
        (Some(Preset::Miniature), _) => {
            let seed = a.seed.unwrap_or(MINIATURE_SEED);
            write_vintage_csv(&miniature_dataset(seed)?, create(&out.join("vintages.csv"))?)?;
            fs::write(out.join("config.toml"), MINIATURE_CONFIG).map_err(io_err(out))?;
            m.seed = Some(seed);
            m.arg("preset", "miniature");
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            let file: DgpFile =
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let dgp = file.into_dgp(a.seed)?;
            let sim = simulate_dgp(&dgp)?;
            let last = sim.panel.origin.last_day();
            write_vintage_csv(&sim.panel.to_vintage_rows(last), create(&out.join("panel.csv"))?)?;
            let specs = dgp.series_specs();
            let mut truth = Vec::new();
            for (i, s) in specs.iter().enumerate() {
                for t in 0..dgp.t_len {
                    let date = dgp.start.plus(t as i64).first_day();
                    truth.push(VintageRow { series_id: s.id.clone(), date, value: Some(sim.truth[(t, i)]), vintage_date: last, line: 0 });
                }
            }
            write_vintage_csv(&truth, create(&out.join("truth.csv"))?)?;
            fs::write(out.join("config.toml"), simulated_config(&dgp, &sim.panel)?.to_toml()).map_err(io_err(out))?;
            m.seed = Some(dgp.seed);
            m.arg("dgp", path.display().to_string());
        }
        (None, None) => return Err(Error::Spec("give --preset or --dgp".into())),
    }
    m.write(out)
}

/// A configuration that fits the simulated panel with the true lag order
/// and quantile levels.
fn simulated_config(dgp: &SyntheticDgp, panel: &MixedFrequencyPanel) -> Result<ModelConfig> {
    let series: Vec<SeriesSpec> = dgp
        .series_specs()
        .into_iter()
        .map(|s| SeriesSpec { transformation: Transformation::Level, ..s })
        .collect();
    let cfg = ModelConfig {
        version: CONFIG_VERSION,
        model: ModelSection {
            p: dgp.params.p().max(1),
            tau: dgp.q.tau().to_vec(),
            target: panel.series[panel.target].id.clone(),
            quarter_anchor: 3,
            start: Some(panel.start),
        },
        sampler: SamplerSection {
            draws: 1000,
            burn_in: 500,
            chains: 2,
            seed: 1,
            thin: 1,
            sigma_sweeps: 1,
            yu_thin: 1,
            slice_widths: Vec::new(),
        },
        prior: Default::default(),
        nowcast: Default::default(),
        series,
    };
    cfg.validate()?;
    Ok(cfg)
}
