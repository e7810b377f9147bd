use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{MixedFrequencyPanel, YearMonth};
use crate::dist::{SliceTuner, DEFAULT_SLICE_WIDTH};
use crate::error::{Error, Result};
use crate::gibbs::{draw_beta, draw_sigma, draw_w, PriorSpec, SamplerSettings};
use crate::model::{beta_unpack, BetaVector, QuantileConfig, QvarParams};
use crate::rng;
use crate::state_space::{
    build_aggregation_constraints, build_stacked_system, missing_sampler, naive_fill, DroppedObservation,
    SelectionMatrices,
};

const MAGIC: &[u8; 8] = b"MFQVCHN1";
const FORMAT_VERSION: u32 = 1;

/// Everything about a chain except its draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainHeader {
    pub format_version: u32,
    pub crate_version: String,
    pub n: usize,
    pub p: usize,
    pub tau: Vec<f64>,
    pub series: Vec<String>,
    pub start: YearMonth,
    pub t_len: usize,
    /// Grid cells (`t·n + i`) drawn as `y^u`, in order.
    pub missing: Vec<usize>,
    pub chain_index: u64,
    pub settings: SamplerSettings,
    pub data_digest: String,
    pub dropped_constraints: Vec<DroppedObservation>,
    pub draws: usize,
    pub yu_draws: usize,
    pub w_len: usize,
}

/// Retained draws of one chain, stored row-major (one row per draw).
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorChain {
    pub header: ChainHeader,
    /// Values of the known cells (observed or held fixed), in cell order.
    pub known: Vec<f64>,
    pub beta_draws: Vec<f64>,
    pub sigma_draws: Vec<f64>,
    pub yu_draws: Vec<f64>,
    pub w_draws: Vec<f64>,
}

/// SHA-256 of the panel's canonical JSON.
pub fn panel_digest(panel: &MixedFrequencyPanel) -> String {
    let bytes = serde_json::to_vec(panel).expect("panel serialises");
    hex::encode(Sha256::digest(bytes))
}

fn state_digest(beta: &BetaVector, sigma: &DMatrix<f64>, w: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in beta.values.iter().chain(sigma.iter()).chain(w) {
        h.update(v.to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

/// Runs chain 0 on stream `settings.seed`.
pub fn run_chain(
    panel: &MixedFrequencyPanel,
    q: &QuantileConfig,
    prior: &PriorSpec,
    settings: &SamplerSettings,
) -> Result<PosteriorChain> {
    run_chain_indexed(panel, q, prior, settings, 0)
}

/// Runs `chains` chains concurrently, chain `c` on its own stream.
pub fn run_chains(
    panel: &MixedFrequencyPanel,
    q: &QuantileConfig,
    prior: &PriorSpec,
    settings: &SamplerSettings,
    chains: usize,
) -> Result<Vec<PosteriorChain>> {
    if chains == 0 {
        return Err(Error::Settings("at least one chain is required".into()));
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..chains)
            .map(|c| s.spawn(move || run_chain_indexed(panel, q, prior, settings, c as u64)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect()
    })
}

pub fn run_chain_indexed(
    panel: &MixedFrequencyPanel,
    q: &QuantileConfig,
    prior: &PriorSpec,
    settings: &SamplerSettings,
    chain_index: u64,
) -> Result<PosteriorChain> {
    settings.validate()?;
    let (n, p) = (prior.n(), prior.p());
    if panel.n() != n || q.dim() != n {
        return Err(Error::Dimension(format!("panel has {} series, prior {n}, quantiles {}", panel.n(), q.dim())));
    }
    let t_len = panel.t_len();
    if t_len <= p {
        return Err(Error::InsufficientData(format!("{t_len} months for {p} lags")));
    }
    let sel = SelectionMatrices::from_panel(panel, p)?;
    let agg = build_aggregation_constraints(panel).restrict_to(&sel);
    let mut y_cells = naive_fill(panel);
    let known = sel.take_observed(&y_cells);

    let n_sigma = n * (n + 1) / 2;
    let widths = match settings.slice_widths.len() {
        0 => vec![DEFAULT_SLICE_WIDTH; n_sigma],
        1 => vec![settings.slice_widths[0]; n_sigma],
        k if k == n_sigma => settings.slice_widths.clone(),
        k => return Err(Error::Settings(format!("{k} slice widths for {n_sigma} coordinates"))),
    };
    let mut tuner = SliceTuner::new(widths);
    if settings.burn_in == 0 {
        tuner.freeze();
    }

    let mut rng = rng::stream(settings.seed, chain_index);
    let mut beta = BetaVector { values: prior.beta_mean().clone() };
    let mut sigma = prior.sigma_start();
    let mut w = vec![1.0; t_len - p];

    let n_u = sel.missing().len();
    let header = ChainHeader {
        format_version: FORMAT_VERSION,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        n,
        p,
        tau: q.tau().to_vec(),
        series: panel.ids(),
        start: panel.start,
        t_len,
        missing: sel.missing().to_vec(),
        chain_index,
        settings: settings.clone(),
        data_digest: panel_digest(panel),
        dropped_constraints: agg.dropped.clone(),
        draws: settings.draws,
        yu_draws: settings.draws.div_ceil(settings.yu_thin),
        w_len: if settings.store_w { t_len - p } else { 0 },
    };
    let mut chain = PosteriorChain {
        known: known.iter().copied().collect(),
        beta_draws: Vec::with_capacity(settings.draws * beta.values.len()),
        sigma_draws: Vec::with_capacity(settings.draws * n * n),
        yu_draws: Vec::with_capacity(header.yu_draws * n_u),
        w_draws: Vec::new(),
        header,
    };

    let mut kept = 0;
    for it in 0..settings.iterations() {
        if it == settings.burn_in {
            tuner.freeze();
        }
        let step = |beta: &mut BetaVector,
                    sigma: &mut DMatrix<f64>,
                    w: &mut Vec<f64>,
                    y_cells: &mut DVector<f64>,
                    tuner: &mut SliceTuner,
                    rng: &mut rng::StreamRng|
         -> Result<Option<DVector<f64>>> {
            let mut yu = None;
            if n_u > 0 {
                let (b0, lags) = beta_unpack(beta, n, p)?;
                let params = QvarParams::new(b0, lags, sigma.clone())?;
                let sys = build_stacked_system(&params, q, w)?;
                let draw = missing_sampler(&sys, &sel, &agg, &known)?.sample(rng);
                *y_cells = sel.combine(&draw, &known)?;
                yu = Some(draw);
            }
            let y = DMatrix::from_row_slice(t_len, n, y_cells.as_slice());
            *beta = draw_beta(&y, w, sigma, q, prior, rng)?;
            *w = draw_w(&y, beta, sigma, q, rng)?;
            *sigma = draw_sigma(&y, beta, w, q, prior, sigma, tuner, settings.sigma_sweeps, rng)?;
            Ok(yu)
        };
        let before = (beta.clone(), sigma.clone(), w.clone());
        let yu = step(&mut beta, &mut sigma, &mut w, &mut y_cells, &mut tuner, &mut rng).map_err(|e| Error::Sampler {
            iteration: it,
            digest: state_digest(&before.0, &before.1, &before.2),
            source: Box::new(e),
        })?;
        if it < settings.burn_in || !(it - settings.burn_in + 1).is_multiple_of(settings.thin) {
            continue;
        }
        chain.beta_draws.extend(beta.values.iter());
        chain.sigma_draws.extend(sigma.iter());
        if kept % settings.yu_thin == 0 {
            if let Some(yu) = &yu {
                chain.yu_draws.extend(yu.iter());
            }
        }
        if settings.store_w {
            chain.w_draws.extend(&w);
        }
        kept += 1;
    }
    Ok(chain)
}

impl PosteriorChain {
    pub fn draws(&self) -> usize {
        self.header.draws
    }

    pub fn n_beta(&self) -> usize {
        BetaVector::len_for(self.header.n, self.header.p)
    }

    pub fn n_missing(&self) -> usize {
        self.header.missing.len()
    }

    pub fn beta(&self, d: usize) -> BetaVector {
        let k = self.n_beta();
        BetaVector { values: DVector::from_column_slice(&self.beta_draws[d * k..(d + 1) * k]) }
    }

    pub fn sigma(&self, d: usize) -> DMatrix<f64> {
        let n = self.header.n;
        DMatrix::from_column_slice(n, n, &self.sigma_draws[d * n * n..(d + 1) * n * n])
    }

    pub fn params(&self, d: usize) -> Result<QvarParams> {
        let (b0, lags) = beta_unpack(&self.beta(d), self.header.n, self.header.p)?;
        QvarParams::new(b0, lags, self.sigma(d))
    }

    /// `y^u` of stored draw `k` (every `yu_thin`-th retained draw).
    pub fn yu(&self, k: usize) -> DVector<f64> {
        let m = self.n_missing();
        DVector::from_column_slice(&self.yu_draws[k * m..(k + 1) * m])
    }

    /// Number of stored `y^u` draws.
    pub fn yu_count(&self) -> usize {
        self.yu_draws.len().checked_div(self.n_missing()).unwrap_or(0)
    }

    /// Complete `T × n` data of stored `y^u` draw `k`.
    pub fn y_full(&self, k: usize) -> DMatrix<f64> {
        let (n, t_len) = (self.header.n, self.header.t_len);
        let mut cells = vec![0.0; n * t_len];
        let mut known = self.known.iter();
        let mut missing = self.header.missing.iter().peekable();
        let yu = if self.n_missing() > 0 { Some(self.yu(k)) } else { None };
        let mut u = 0;
        for (c, slot) in cells.iter_mut().enumerate() {
            if missing.peek() == Some(&&c) {
                missing.next();
                *slot = yu.as_ref().expect("missing cells have draws")[u];
                u += 1;
            } else {
                *slot = *known.next().expect("known cells cover the rest");
            }
        }
        DMatrix::from_row_slice(t_len, n, &cells)
    }

    fn check(&self) -> Result<()> {
        let h = &self.header;
        let ok = self.beta_draws.len() == h.draws * self.n_beta()
            && self.sigma_draws.len() == h.draws * h.n * h.n
            && self.yu_draws.len() == if self.n_missing() > 0 { h.yu_draws * self.n_missing() } else { 0 }
            && self.w_draws.len() == h.draws * h.w_len
            && self.known.len() + h.missing.len() == h.n * h.t_len;
        if ok {
            Ok(())
        } else {
            Err(Error::Format("chain arrays do not match the header".into()))
        }
    }

    /// Binary chain file: magic, little-endian `u64` header length, JSON
    /// header, then the `known`, `beta`, `sigma`, `y^u` and `w` arrays as
    /// little-endian `f64`.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        self.check()?;
        let header = serde_json::to_vec(&self.header).map_err(|e| Error::Format(e.to_string()))?;
        let io = |e| Error::io("<chain stream>", e);
        out.write_all(MAGIC).map_err(io)?;
        out.write_all(&(header.len() as u64).to_le_bytes()).map_err(io)?;
        out.write_all(&header).map_err(io)?;
        for arr in [&self.known, &self.beta_draws, &self.sigma_draws, &self.yu_draws, &self.w_draws] {
            let mut buf = Vec::with_capacity(arr.len() * 8);
            for v in arr.iter() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            out.write_all(&buf).map_err(io)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes).map_err(|e| Error::io("<chain stream>", e))?;
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(Error::Format("not a chain file".into()));
        }
        let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
        let body = bytes.get(16..16 + len).ok_or_else(|| Error::Format("truncated header".into()))?;
        let header: ChainHeader = serde_json::from_slice(body).map_err(|e| Error::Format(e.to_string()))?;
        if header.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported chain format {}", header.format_version)));
        }
        let mut floats = bytes[16 + len..].chunks_exact(8);
        if !floats.remainder().is_empty() {
            return Err(Error::Format("trailing bytes".into()));
        }
        let n_missing = header.missing.len();
        let sizes = [
            header.n * header.t_len - n_missing,
            header.draws * BetaVector::len_for(header.n, header.p),
            header.draws * header.n * header.n,
            if n_missing > 0 { header.yu_draws * n_missing } else { 0 },
            header.draws * header.w_len,
        ];
        let mut arrays: Vec<Vec<f64>> = Vec::with_capacity(5);
        for size in sizes {
            let arr: Vec<f64> = floats
                .by_ref()
                .take(size)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            if arr.len() != size {
                return Err(Error::Format("truncated draws".into()));
            }
            arrays.push(arr);
        }
        if floats.next().is_some() {
            return Err(Error::Format("trailing draws".into()));
        }
        let mut it = arrays.into_iter();
        let chain = PosteriorChain {
            header,
            known: it.next().expect("5 arrays"),
            beta_draws: it.next().expect("5 arrays"),
            sigma_draws: it.next().expect("5 arrays"),
            yu_draws: it.next().expect("5 arrays"),
            w_draws: it.next().expect("5 arrays"),
        };
        chain.check()?;
        Ok(chain)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(f))
    }

    /// Parameter names in CSV order: `b0[i]`, `B{j}[i,k]`, `sigma[i,k]`.
    pub fn parameter_names(&self) -> Vec<String> {
        let h = &self.header;
        let mut names = Vec::new();
        let m = 1 + h.n * h.p;
        for col in 0..m {
            for i in 0..h.n {
                names.push(if col == 0 {
                    format!("b0[{}]", h.series[i])
                } else {
                    let (j, k) = ((col - 1) / h.n + 1, (col - 1) % h.n);
                    format!("B{j}[{},{}]", h.series[i], h.series[k])
                });
            }
        }
        for c in 0..h.n {
            for r in 0..h.n {
                names.push(format!("sigma[{},{}]", h.series[r], h.series[c]));
            }
        }
        names
    }

    /// Long CSV `draw,parameter,value` of `β` and `Σ`, values printed in
    /// shortest round-trip form.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let to_err = |e: csv::Error| Error::Format(e.to_string());
        wtr.write_record(["draw", "parameter", "value"]).map_err(to_err)?;
        let names = self.parameter_names();
        let (nb, ns) = (self.n_beta(), self.header.n * self.header.n);
        for d in 0..self.draws() {
            let values = self.beta_draws[d * nb..(d + 1) * nb].iter().chain(&self.sigma_draws[d * ns..(d + 1) * ns]);
            for (name, v) in names.iter().zip(values) {
                wtr.write_record([d.to_string(), name.clone(), format!("{v:?}")]).map_err(to_err)?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))
    }

    /// Reads `β` and `Σ` draws back from [`PosteriorChain::write_csv`] output.
    pub fn read_csv_draws<R: Read>(input: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut names: Vec<String> = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
            let d: usize = rec[0].parse().map_err(|_| Error::Format("bad draw index".into()))?;
            let v: f64 = rec[2].parse().map_err(|_| Error::Format("bad value".into()))?;
            if d == rows.len() {
                rows.push(Vec::new());
            }
            if d == 0 {
                names.push(rec[1].to_string());
            }
            rows.last_mut().ok_or_else(|| Error::Format("draws out of order".into()))?.push(v);
        }
        Ok((names, rows))
    }
}
