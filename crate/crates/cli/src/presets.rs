//! Named experiments and the custom sweep, with their CSV and plot outputs.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qce_core::constellation::{Kind, Modulation};
use qce_core::precoder::MsmOptions;
use qce_core::sim::{
    alpha_range_stats, ber_curve, db_grid, distortion_stats, iteration_stats, ptx_at_ber, run_ber,
    write_csv, BerRecord, Scheme, SimConfig, SimError, StudyConfig,
};
use serde::Serialize;

use crate::config::{Layer, Params};
use crate::plot;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Table1,
    Table2,
    Table3,
    Table4,
}

const MODULATIONS: [Modulation; 5] = [
    Modulation::QPSK,
    Modulation::PSK8,
    Modulation::PSK16,
    Modulation::QAM16,
    Modulation::QAM64,
];

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Fig5,
        Preset::Fig6,
        Preset::Fig7,
        Preset::Fig8,
        Preset::Table1,
        Preset::Table2,
        Preset::Table3,
        Preset::Table4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
            Preset::Table1 => "table1",
            Preset::Table2 => "table2",
            Preset::Table3 => "table3",
            Preset::Table4 => "table4",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Preset::Fig5 => "BER vs Ptx, QPSK, Q=4: MSM, QWF, WF-CE and ideal WF",
            Preset::Fig6 => "BER vs Ptx of MSM for five modulations, Q=4, with ideal WF",
            Preset::Fig7 => "BER vs Ptx of MSM for five modulations, Q=8, with ideal WF",
            Preset::Fig8 => "BER vs CSI error variance, 16QAM, Q=4, Ptx=10 dB",
            Preset::Table1 => "quantization distortion for block sizes B=1 and B=4",
            Preset::Table2 => "relative range of the joint alpha over N and M",
            Preset::Table3 => "maximal relative range of per-user alphas over N and M",
            Preset::Table4 => "mean simplex iterations per modulation and Q",
        }
    }

    /// Settings baked into the preset, below any config file or flag.
    pub fn defaults(self) -> Layer {
        let qam16 = Some("16QAM".to_string());
        match self {
            Preset::Fig5 => Layer { modulation: Some("QPSK".into()), q: Some(4), ..Default::default() },
            Preset::Fig6 => Layer { q: Some(4), ..Default::default() },
            Preset::Fig7 => Layer { q: Some(8), ..Default::default() },
            Preset::Fig8 => Layer {
                modulation: qam16,
                q: Some(4),
                ptx_min_db: Some(10.0),
                ptx_max_db: Some(10.0),
                ..Default::default()
            },
            Preset::Table1 => Layer {
                modulation: qam16,
                q: Some(4),
                n: Some(64),
                m: Some(8),
                channels: Some(1),
                vectors: Some(1024),
                ..Default::default()
            },
            Preset::Table2 | Preset::Table3 => Layer { modulation: qam16, q: Some(4), ..Default::default() },
            Preset::Table4 => Layer { n: Some(64), m: Some(8), channels: Some(4), vectors: Some(16), ..Default::default() },
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                format!("unknown preset `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// Files and console output of one run.
#[derive(Debug)]
pub struct Report {
    pub csv: PathBuf,
    pub plot: PathBuf,
    pub summary: String,
    /// Skipped realizations, as diagnostics.
    pub failures: Vec<String>,
}

pub fn run(preset: Option<Preset>, params: &Params, out_dir: &Path) -> Result<Report, CliError> {
    let mut params = params.clone();
    if matches!(preset, None | Some(Preset::Fig5 | Preset::Fig6 | Preset::Fig7 | Preset::Fig8)) {
        params.n = Some(params.n.unwrap_or(64));
        params.m = Some(params.m.unwrap_or(8));
        params.q = Some(params.q.unwrap_or(4));
    }
    if preset != Some(Preset::Fig8) {
        params.nu = Some(params.nu.unwrap_or(0.0));
    }
    let params = &params;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    let name = preset.map_or("custom", Preset::name);
    let mut meta = vec![
        ("tool".to_string(), format!("qce {}", env!("CARGO_PKG_VERSION"))),
        ("experiment".to_string(), name.to_string()),
    ];
    meta.extend(params.echo());
    let csv = out_dir.join(format!("{name}.csv"));
    let plot = out_dir.join(format!("{name}_plot.py"));
    let opts = msm_options(params);

    let (summary, failures, script) = match preset {
        None | Some(Preset::Fig5 | Preset::Fig6 | Preset::Fig7) => {
            let series = ber_series(preset, params);
            meta.push(("series".into(), series_label(&series)));
            let (records, failures) = sweep(params, &series, &[params.nu.unwrap_or(0.0)], &opts)?;
            write_records(&csv, &records, &meta)?;
            (ber_summary(&records, false), failures, plot::ber_script(name, "ptx_db"))
        }
        Some(Preset::Fig8) => {
            let series = ber_series(preset, params);
            let nus = params.nu.map_or_else(|| db_grid(0.0, 0.3, 0.05), |v| vec![v]);
            meta.push(("series".into(), series_label(&series)));
            meta.push(("nu_grid".into(), join(&nus)));
            let (records, failures) = sweep(params, &series, &nus, &opts)?;
            write_records(&csv, &records, &meta)?;
            (ber_summary(&records, true), failures, plot::ber_script(name, "nu"))
        }
        Some(Preset::Table1) => {
            let rows = table1(params, &opts)?;
            write_table(&csv, "qce-distortion/1", &meta, &rows)?;
            let mut s = String::from("   B  distorted fraction       MSE   mean delta\n");
            for r in &rows {
                let _ = writeln!(s, "{:>4}  {:>18.4}  {:>8.4}  {:>11.4}", r.block, r.distorted_fraction, r.mse, r.mean_delta);
            }
            (s, Vec::new(), plot::table1_script(name))
        }
        Some(p @ (Preset::Table2 | Preset::Table3)) => {
            let (ns, ms) = alpha_grid(params);
            meta.push(("n_grid".into(), format!("{ns:?}")));
            meta.push(("m_grid".into(), format!("{ms:?}")));
            let rows = alpha_table(params, &opts)?;
            write_table(&csv, "qce-alpha-range/1", &meta, &rows)?;
            let per_user = p == Preset::Table3;
            let mut s = format!(
                "   N    M  {}\n",
                if per_user { "max per-user relative range" } else { "joint relative range" }
            );
            for r in &rows {
                let v = if per_user { r.per_user } else { r.joint };
                let _ = writeln!(s, "{:>4} {:>4}  {v:>8.3}", r.n, r.m);
            }
            (s, Vec::new(), plot::alpha_script(name, per_user))
        }
        Some(Preset::Table4) => {
            let (mods, qs) = iteration_grid(params);
            meta.push(("modulation_grid".into(), mods.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" ")));
            meta.push(("q_grid".into(), format!("{qs:?}")));
            let rows = iteration_table(params, &opts)?;
            write_table(&csv, "qce-iterations/1", &meta, &rows)?;
            let mut s = String::from("modulation    Q  iterations    pivots   op count\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:<10} {:>4}  {:>10.2}  {:>8.2}  {:>9.0}",
                    r.modulation, r.q, r.mean_iterations, r.mean_pivots, r.mean_op_count
                );
            }
            (s, Vec::new(), plot::iterations_script(name))
        }
    };
    std::fs::write(&plot, script).map_err(|e| CliError::Io(format!("{}: {e}", plot.display())))?;
    Ok(Report { csv, plot, summary, failures })
}

fn msm_options(params: &Params) -> MsmOptions {
    let mut opts = MsmOptions::default();
    opts.lp.max_iters = params.lp_max_iterations;
    opts
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(" ")
}

fn series_label(series: &[(Scheme, Modulation)]) -> String {
    series.iter().map(|(s, m)| format!("{s}/{m}")).collect::<Vec<_>>().join(" ")
}

fn ber_series(preset: Option<Preset>, params: &Params) -> Vec<(Scheme, Modulation)> {
    let (schemes, mods): (Vec<Scheme>, Vec<Modulation>) = match preset {
        Some(Preset::Fig5) => (Scheme::ALL.to_vec(), vec![Modulation::QPSK]),
        Some(Preset::Fig6 | Preset::Fig7) => (vec![Scheme::Msm, Scheme::WfIdeal], MODULATIONS.to_vec()),
        Some(Preset::Fig8) => (
            vec![Scheme::Msm, Scheme::WfCe, Scheme::Qwf, Scheme::WfIdeal],
            vec![Modulation::QAM16],
        ),
        _ => (vec![Scheme::Msm], vec![Modulation::QPSK]),
    };
    let schemes = params.precoder.map_or(schemes, |s| vec![s]);
    let mods = params.modulation.map_or(mods, |m| vec![m]);
    mods.iter().flat_map(|&m| schemes.iter().map(move |&s| (s, m))).collect()
}

fn solver_failure(e: SimError) -> CliError {
    match e {
        SimError::InvalidConfig(msg) => CliError::Config(msg),
        SimError::Constellation(e) => CliError::Config(e.to_string()),
        other => CliError::Solver(other.to_string()),
    }
}

fn sweep(
    params: &Params,
    series: &[(Scheme, Modulation)],
    nus: &[f64],
    opts: &MsmOptions,
) -> Result<(Vec<BerRecord>, Vec<String>), CliError> {
    let ptx_db = db_grid(params.ptx_min_db, params.ptx_max_db, params.ptx_step_db);
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for &nu in nus {
        for &(scheme, modulation) in series {
            let cfg = SimConfig {
                n: params.n.unwrap_or(64),
                m: params.m.unwrap_or(8),
                q: params.q.unwrap_or(4),
                modulation,
                scheme,
                ptx_db: ptx_db.clone(),
                nu,
                channels: params.channels,
                vectors_per_channel: params.vectors,
                block_len: params.block_len,
                seed: params.seed,
                ..Default::default()
            };
            log::info!("running {scheme} {modulation} nu={nu}");
            let out = run_ber(&cfg, opts).map_err(solver_failure)?;
            for f in out.failures {
                failures.push(format!("{scheme} {modulation} nu={nu} realization {}: {}", f.realization, f.message));
            }
            records.extend(out.records);
        }
    }
    Ok((records, failures))
}

fn write_records(path: &Path, records: &[BerRecord], meta: &[(String, String)]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    write_csv(&mut w, records, meta).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

fn write_table<T: Serialize>(
    path: &Path,
    schema: &str,
    meta: &[(String, String)],
    rows: &[T],
) -> Result<(), CliError> {
    let io = |e: &dyn std::fmt::Display| CliError::Io(format!("{}: {e}", path.display()));
    let mut file = BufWriter::new(File::create(path).map_err(|e| io(&e))?);
    writeln!(file, "# schema: {schema}").map_err(|e| io(&e))?;
    for (k, v) in meta {
        writeln!(file, "# {k}: {v}").map_err(|e| io(&e))?;
    }
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r).map_err(|e| io(&e))?;
    }
    w.flush().map_err(|e| io(&e))
}

/// Console table of BER per grid point, one column per series.
fn ber_summary(records: &[BerRecord], by_nu: bool) -> String {
    let mut keys: Vec<String> = Vec::new();
    let label = |r: &BerRecord| match r.q {
        Some(q) => format!("{} {} Q={q}", r.precoder, r.modulation),
        None => format!("{} {}", r.precoder, r.modulation),
    };
    for r in records {
        let k = label(r);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    for r in records {
        let p = (r.ptx_db, r.nu);
        if !points.contains(&p) {
            points.push(p);
        }
    }
    points.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    let width = keys.iter().map(String::len).max().unwrap_or(8).max(10);
    let mut s = format!("{:>7} {:>6}", "ptx_db", "nu");
    for k in &keys {
        let _ = write!(s, "  {k:>width$}");
    }
    s.push('\n');
    for &(ptx, nu) in &points {
        let _ = write!(s, "{ptx:>7.1} {nu:>6.2}");
        for k in &keys {
            let ber = records
                .iter()
                .find(|r| label(r) == *k && r.ptx_db == ptx && r.nu == nu)
                .map(|r| r.ber);
            match ber {
                Some(b) => { let _ = write!(s, "  {b:>width$.3e}"); }
                None => { let _ = write!(s, "  {:>width$}", "-"); }
            }
        }
        s.push('\n');
    }
    if !by_nu {
        s.push_str("Ptx at BER 1e-2:\n");
        for k in &keys {
            let curve: Vec<BerRecord> = records.iter().filter(|r| label(r) == *k).cloned().collect();
            match ptx_at_ber(&ber_curve(&curve), 1e-2) {
                Some(p) => { let _ = writeln!(s, "  {k:<width$}  {p:>6.2} dB"); }
                None => { let _ = writeln!(s, "  {k:<width$}  not reached"); }
            }
        }
    }
    s
}

#[derive(Debug, Serialize)]
struct DistortionRow {
    block: usize,
    distorted_fraction: f64,
    mse: f64,
    mean_delta: f64,
    vectors: usize,
}

fn study(params: &Params, n: usize, m: usize) -> StudyConfig {
    StudyConfig {
        n,
        m,
        q: params.q.unwrap_or(4),
        modulation: params.modulation.unwrap_or(Modulation::QAM16),
        channels: params.channels,
        vectors_per_channel: params.vectors,
        seed: params.seed,
    }
}

fn require_qam(params: &Params) -> Result<(), CliError> {
    match params.modulation {
        Some(m) if m.kind != Kind::Qam => {
            Err(CliError::Config(format!("this table needs a QAM modulation, got {m}")))
        }
        _ => Ok(()),
    }
}

fn table1(params: &Params, opts: &MsmOptions) -> Result<Vec<DistortionRow>, CliError> {
    require_qam(params)?;
    let cfg = study(params, params.n.unwrap_or(64), params.m.unwrap_or(8));
    [1, 4]
        .iter()
        .map(|&b| {
            let d = distortion_stats(&cfg, b, opts).map_err(solver_failure)?;
            Ok(DistortionRow {
                block: d.block,
                distorted_fraction: d.distorted_fraction,
                mse: d.mse,
                mean_delta: d.mean_delta,
                vectors: d.vectors,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct AlphaRow {
    n: usize,
    m: usize,
    joint: f64,
    per_user: f64,
}

fn alpha_grid(params: &Params) -> (Vec<usize>, Vec<usize>) {
    (
        params.n.map_or(vec![64, 200], |n| vec![n]),
        params.m.map_or(vec![2, 8, 14], |m| vec![m]),
    )
}

fn alpha_table(params: &Params, opts: &MsmOptions) -> Result<Vec<AlphaRow>, CliError> {
    require_qam(params)?;
    let (ns, ms) = alpha_grid(params);
    let mut rows = Vec::new();
    for &n in &ns {
        for &m in &ms {
            let a = alpha_range_stats(&study(params, n, m), opts).map_err(solver_failure)?;
            rows.push(AlphaRow { n, m, joint: a.joint, per_user: a.per_user });
        }
    }
    Ok(rows)
}

#[derive(Debug, Serialize)]
struct IterationRow {
    modulation: String,
    q: usize,
    mean_iterations: f64,
    mean_pivots: f64,
    mean_op_count: f64,
    solves: usize,
}

fn iteration_grid(params: &Params) -> (Vec<Modulation>, Vec<usize>) {
    (
        params.modulation.map_or(MODULATIONS.to_vec(), |m| vec![m]),
        params.q.map_or(vec![4, 8, 16], |q| vec![q]),
    )
}

fn iteration_table(params: &Params, opts: &MsmOptions) -> Result<Vec<IterationRow>, CliError> {
    let (mods, qs) = iteration_grid(params);
    let keys: Vec<(Modulation, usize)> = mods.iter().flat_map(|&m| qs.iter().map(move |&q| (m, q))).collect();
    let cfg = study(params, params.n.unwrap_or(64), params.m.unwrap_or(8));
    let stats = iteration_stats(&cfg, &keys, opts).map_err(solver_failure)?;
    Ok(stats
        .into_iter()
        .map(|s| IterationRow {
            modulation: s.modulation.to_string(),
            q: s.q,
            mean_iterations: s.mean_iterations,
            mean_pivots: s.mean_pivots,
            mean_op_count: s.mean_op_count,
            solves: s.solves,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_parse() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert_eq!("FIG5".parse::<Preset>().unwrap(), Preset::Fig5);
        assert!("fig9".parse::<Preset>().is_err());
    }

    #[test]
    fn flags_narrow_the_series() {
        let params = Params::resolve(&Layer::default()).unwrap();
        assert_eq!(ber_series(Some(Preset::Fig5), &params).len(), 4);
        assert_eq!(ber_series(Some(Preset::Fig6), &params).len(), 10);
        let narrowed = Params { precoder: Some(Scheme::Msm), ..params.clone() };
        assert_eq!(ber_series(Some(Preset::Fig6), &narrowed).len(), 5);
        assert_eq!(ber_series(None, &params), vec![(Scheme::Msm, Modulation::QPSK)]);
    }
}
