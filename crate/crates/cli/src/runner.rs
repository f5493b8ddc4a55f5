use serde::Serialize;
use sqkd_core::device::ChannelParams;
use sqkd_core::link_budget::{
    raw_key_rate, reach, sweep_background, write_link_budget_csv, LinkBudgetPoint,
};
use sqkd_core::protocol::{
    estimate_channel, generate_codebook, sift, simulate_transmission, write_key_record_csv, KeyPair,
    RunManifest,
};
use sqkd_core::security::{
    asymptotic_key, composite_key, default_split_grid, mutual_information, optimize_key_split, snr, ChannelSource,
    FiniteSizeParams, FiniteSizeReport, SecurityReport,
};
use sqkd_core::stats::{bootstrap_mi_std, gaussian_mi};
use sqkd_core::Execution;

use crate::config::{ExperimentConfig, Format};
use crate::error::CliError;
use crate::output::{num, write_table, OutputDir};

/// What a run produced, for the console.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub lines: Vec<String>,
    pub files: Vec<std::path::PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub report: SecurityReport,
}

pub const SWEEP_COLUMNS: [&str; 13] = [
    "index",
    "loss",
    "noise_photons",
    "snr",
    "mi_bits",
    "holevo_bits",
    "asymptotic_key",
    "delta",
    "eps_star",
    "n_star",
    "holevo_star",
    "finite_key_bits",
    "composite_key",
];

fn finite_size_for(
    config: &ExperimentConfig,
    channel: &ChannelParams,
    fs: &FiniteSizeParams,
) -> Result<FiniteSizeReport, CliError> {
    let chain = config.chain();
    let rep = if config.security.optimize_split {
        optimize_key_split(&chain, channel, fs, &default_split_grid())?
    } else {
        composite_key(&chain, ChannelSource::Exact(*channel), fs)?
    };
    Ok(rep)
}

/// Security report per grid point, in grid order.
pub fn run_sweep(config: &ExperimentConfig) -> Result<(Vec<SweepPoint>, RunSummary), CliError> {
    let config = config.resolved()?;
    let chain = config.chain();
    let fs = config.security.finite_size(config.symbols, config.symbols / 2)?;
    let channels = config
        .channel_grid
        .iter()
        .map(|p| p.channel(config.channel_loss))
        .collect::<Result<Vec<_>, _>>()?;
    let points = Execution::default().try_map_slice(&channels, |ch| -> Result<_, CliError> {
        let mut report = SecurityReport::exact(&chain, ch, None)?;
        report.finite_size = Some(finite_size_for(&config, ch, &fs)?);
        report.finite_size_params = Some(fs.clone());
        Ok(report)
    })?;
    let points: Vec<SweepPoint> = points
        .into_iter()
        .enumerate()
        .map(|(index, report)| SweepPoint { index, report })
        .collect();

    let mut out = OutputDir::create(&config, "sweep")?;
    if config.wants(Format::Csv) {
        out.write("sweep.csv", |w, comments| {
            write_table(w, comments, &SWEEP_COLUMNS, points.iter().map(sweep_row))
        })?;
    }
    if config.wants(Format::Json) {
        out.write_json("sweep.json", "points", &points)?;
    }

    let mut summary = RunSummary::default();
    summary.lines.push(format!("{} grid points", points.len()));
    if let Some(n) = grid_crossing(&points, |r| r.asymptotic_key_bits) {
        summary.lines.push(format!("asymptotic key crosses zero near n = {n:.4}"));
    }
    if config.security.any_penalty() {
        if let Some(n) = grid_crossing(&points, |r| r.finite_size.as_ref().map_or(f64::NAN, |f| f.composite_key)) {
            summary.lines.push(format!("finite-size key crosses zero near n = {n:.4}"));
        }
    }
    summary.files = out.written().to_vec();
    Ok((points, summary))
}

fn sweep_row(p: &SweepPoint) -> Vec<String> {
    let r = &p.report;
    let fs = r.finite_size.as_ref().expect("sweep reports carry finite-size data");
    vec![
        p.index.to_string(),
        num(r.channel.loss),
        num(r.channel.coupled_noise_photons),
        num(r.snr),
        num(r.mi_bits),
        num(r.holevo_bits),
        num(r.asymptotic_key_bits),
        num(fs.delta),
        num(fs.eps_star),
        num(fs.n_star),
        num(fs.holevo_star),
        num(fs.key_bits_per_symbol),
        num(fs.composite_key),
    ]
}

/// Linear interpolation of the first positive-to-non-positive transition
/// along the grid's noise axis.
fn grid_crossing(points: &[SweepPoint], key: impl Fn(&SecurityReport) -> f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let (a, b) = (&w[0].report, &w[1].report);
        let (ka, kb) = (key(a), key(b));
        (ka > 0.0 && kb <= 0.0).then(|| {
            let (na, nb) = (a.channel.coupled_noise_photons, b.channel.coupled_noise_photons);
            na + (nb - na) * ka / (ka - kb)
        })
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolResult {
    pub manifest: RunManifest,
    pub sifted: usize,
    pub key_symbols: usize,
    pub estimation_symbols: usize,
    pub empirical_mi_bits: f64,
    pub empirical_mi_std: f64,
    pub model_mi_bits: f64,
    /// Asymptotic key at the configured operating point.
    pub model_key_bits: f64,
    pub report: SecurityReport,
}

pub const PROTOCOL_SUMMARY_COLUMNS: [&str; 15] = [
    "symbols",
    "sifted",
    "key_symbols",
    "estimation_symbols",
    "loss_hat",
    "loss_std",
    "noise_hat",
    "noise_std",
    "empirical_mi_bits",
    "empirical_mi_std",
    "model_mi_bits",
    "model_key",
    "estimated_key",
    "finite_key_bits",
    "composite_key",
];

/// Codebook, transmission, sifting, estimation and the finite-size key.
pub fn run_protocol(config: &ExperimentConfig) -> Result<(ProtocolResult, RunSummary), CliError> {
    let config = config.resolved()?;
    let chain = config.chain();
    let channel = ChannelParams::new(config.channel_loss, config.operating_noise).map_err(CliError::from_core_as_config)?;
    let variance = chain.codebook_variance()?;
    let exec = Execution::default();
    let codebook = generate_codebook(config.symbols, variance, config.seed)?;
    let record = simulate_transmission(&codebook, &chain, &channel, config.seed, config.basis_mode, exec)?;
    let pairs = sift(&record);
    let fs = config.security.finite_size(config.symbols, pairs.len())?;
    // Key block first, estimation block after it.
    let (key_block, pe_block) = pairs.split_at(fs.key_symbols);
    let est_pairs: &[KeyPair] = if fs.include_pe { pe_block } else { &pairs };
    let estimate = estimate_channel(est_pairs, &chain)?;
    let report = SecurityReport::estimated(&chain, &estimate, Some(&fs))?;

    let (alpha, beta): (Vec<f64>, Vec<f64>) = pairs.iter().map(|p| (p.alpha, p.beta)).unzip();
    let empirical_mi_bits = gaussian_mi(&alpha, &beta)?;
    let empirical_mi_std = bootstrap_mi_std(&alpha, &beta, config.bootstrap_resamples, config.seed)?;
    let manifest = RunManifest {
        chain: chain.clone(),
        channel,
        symbols: config.symbols,
        codebook_variance: variance,
        codebook_seed: config.seed,
        transmission_seed: config.seed,
        mode: config.basis_mode,
    };
    let result = ProtocolResult {
        manifest: manifest.clone(),
        sifted: pairs.len(),
        key_symbols: key_block.len(),
        estimation_symbols: pe_block.len(),
        empirical_mi_bits,
        empirical_mi_std,
        model_mi_bits: mutual_information(snr(&chain, &channel)?)?,
        model_key_bits: asymptotic_key(&chain, &channel)?,
        report,
    };

    let mut out = OutputDir::create(&config, "protocol")?;
    out.write_json("manifest.json", "manifest", &manifest)?;
    if config.wants(Format::Csv) {
        out.write("key_record.csv", |w, comments| {
            write_key_record_csv(&record, comments, w).map_err(CliError::from)
        })?;
        out.write("protocol_summary.csv", |w, comments| {
            write_table(w, comments, &PROTOCOL_SUMMARY_COLUMNS, [protocol_row(&result)])
        })?;
    }
    if config.wants(Format::Json) {
        out.write_json("protocol_report.json", "result", &result)?;
    }

    let fs_rep = result.report.finite_size.as_ref().expect("finite-size requested");
    let est = &estimate;
    let summary = RunSummary {
        lines: vec![
            format!("{} symbols, {} sifted ({} key, {} estimation)", config.symbols, result.sifted, result.key_symbols, result.estimation_symbols),
            format!("eps_hat = {:.5} +- {:.5}, n_hat = {:.5} +- {:.5}", est.loss, est.loss_std, est.noise_photons, est.noise_std),
            format!("MI empirical {:.4} +- {:.4} bits, model {:.4} bits", empirical_mi_bits, empirical_mi_std, result.model_mi_bits),
            format!("K = {:.4} bits/symbol at the operating point, {:.4} from the estimated channel", result.model_key_bits, result.report.asymptotic_key_bits),
            format!("finite-size key = {:.4} bits/symbol, {:.4} bits/raw symbol", fs_rep.key_bits_per_symbol, fs_rep.composite_key),
        ],
        files: out.written().to_vec(),
    };
    Ok((result, summary))
}

fn protocol_row(r: &ProtocolResult) -> Vec<String> {
    let est = r.report.estimate.as_ref().expect("estimated report");
    let fs = r.report.finite_size.as_ref().expect("finite-size report");
    vec![
        r.manifest.symbols.to_string(),
        r.sifted.to_string(),
        r.key_symbols.to_string(),
        r.estimation_symbols.to_string(),
        num(est.loss),
        num(est.loss_std),
        num(est.noise_photons),
        num(est.noise_std),
        num(r.empirical_mi_bits),
        num(r.empirical_mi_std),
        num(r.model_mi_bits),
        num(r.model_key_bits),
        num(r.report.asymptotic_key_bits),
        num(fs.key_bits_per_symbol),
        num(fs.composite_key),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct MediumReach {
    pub label: String,
    pub attenuation_db_per_m: f64,
    pub point: LinkBudgetPoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkBudgetResult {
    pub media: Vec<MediumReach>,
    pub sweep_attenuation_db_per_m: f64,
    pub sweep: Vec<LinkBudgetPoint>,
}

pub const REACH_COLUMNS: [&str; 5] = ["label", "attenuation_db_per_m", "n_th", "eps_max", "distance_m"];

/// Reach for each configured medium and tolerable loss over the background
/// grid.
pub fn run_linkbudget(config: &ExperimentConfig) -> Result<(LinkBudgetResult, RunSummary), CliError> {
    let config = config.resolved()?;
    let chain = config.chain();
    let media = config
        .media
        .iter()
        .map(|m| {
            let spec = m.resolve()?;
            Ok(MediumReach {
                point: reach(&chain, &spec)?,
                label: spec.label,
                attenuation_db_per_m: spec.attenuation_db_per_m,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let sweep = sweep_background(
        &chain,
        config.sweep_attenuation_db_per_m,
        &config.background_grid,
        Execution::default(),
    )
    .map_err(CliError::from_core_as_config)?;
    let result = LinkBudgetResult {
        media,
        sweep_attenuation_db_per_m: config.sweep_attenuation_db_per_m,
        sweep,
    };

    let mut out = OutputDir::create(&config, "linkbudget")?;
    if config.wants(Format::Csv) {
        out.write("reach.csv", |w, comments| {
            write_table(
                w,
                comments,
                &REACH_COLUMNS,
                result.media.iter().map(|m| {
                    vec![
                        m.label.clone(),
                        num(m.attenuation_db_per_m),
                        num(m.point.background_photons),
                        num(m.point.max_loss),
                        num(m.point.distance_m),
                    ]
                }),
            )
        })?;
        out.write("linkbudget.csv", |w, comments| {
            write_link_budget_csv(&result.sweep, comments, w).map_err(CliError::from)
        })?;
    }
    if config.wants(Format::Json) {
        out.write_json("linkbudget.json", "result", &result)?;
    }
    let mut lines: Vec<String> = result
        .media
        .iter()
        .map(|m| {
            format!(
                "{}: n_th = {:.3e}, eps_max = {:.4e}, d* = {:.1} m",
                m.label, m.point.background_photons, m.point.max_loss, m.point.distance_m
            )
        })
        .collect();
    lines.push(format!("{} background grid points", result.sweep.len()));
    Ok((
        result,
        RunSummary {
            lines,
            files: out.written().to_vec(),
        },
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatingPointReport {
    pub report: SecurityReport,
    pub bandwidth_hz: f64,
    pub raw_key_rate_bps: f64,
}

pub const REPORT_COLUMNS: [&str; 9] = [
    "loss",
    "noise_photons",
    "snr",
    "mi_bits",
    "holevo_bits",
    "asymptotic_key",
    "finite_key_bits",
    "composite_key",
    "raw_key_rate_bps",
];

/// Security report at the configured operating point.
pub fn run_report(config: &ExperimentConfig) -> Result<(OperatingPointReport, RunSummary), CliError> {
    let config = config.resolved()?;
    let chain = config.chain();
    let channel = ChannelParams::new(config.channel_loss, config.operating_noise).map_err(CliError::from_core_as_config)?;
    let fs = config.security.finite_size(config.symbols, config.symbols / 2)?;
    let mut report = SecurityReport::exact(&chain, &channel, None)?;
    report.finite_size = Some(finite_size_for(&config, &channel, &fs)?);
    report.finite_size_params = Some(fs);
    let result = OperatingPointReport {
        raw_key_rate_bps: raw_key_rate(&chain, &channel, config.bandwidth_hz)?,
        bandwidth_hz: config.bandwidth_hz,
        report,
    };
    let mut out = OutputDir::create(&config, "report")?;
    let r = &result.report;
    let f = r.finite_size.as_ref().expect("finite-size report");
    if config.wants(Format::Csv) {
        let row = vec![
            num(r.channel.loss),
            num(r.channel.coupled_noise_photons),
            num(r.snr),
            num(r.mi_bits),
            num(r.holevo_bits),
            num(r.asymptotic_key_bits),
            num(f.key_bits_per_symbol),
            num(f.composite_key),
            num(result.raw_key_rate_bps),
        ];
        out.write("report.csv", |w, comments| write_table(w, comments, &REPORT_COLUMNS, [row]))?;
    }
    if config.wants(Format::Json) {
        out.write_json("report.json", "result", &result)?;
    }
    let lines = vec![
        format!("SNR = {:.4}, I = {:.4} bits, chi_E = {:.4} bits", r.snr, r.mi_bits, r.holevo_bits),
        format!("K = {:.4} bits/symbol", r.asymptotic_key_bits),
        format!("finite-size key = {:.4} bits/symbol, {:.4} bits/raw symbol", f.key_bits_per_symbol, f.composite_key),
        format!("raw key rate at {:.0} kHz = {:.1} kbit/s", config.bandwidth_hz / 1e3, result.raw_key_rate_bps / 1e3),
    ];
    Ok((
        result,
        RunSummary {
            lines,
            files: out.written().to_vec(),
        },
    ))
}
