use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use ssakit::model::{ROOT_CLUSTER_TOL, CONDITION_WARNING};
use ssakit::series::format_g17;
use ssakit::*;
use std::result::Result;

use crate::args::*;
use crate::CliError;

/// What a subcommand produces: text written verbatim, or a value printed as
/// JSON.
pub enum Output {
    Text(String),
    Json(serde_json::Value),
}

type Res = Result<Output, CliError>;

fn json<T: Serialize>(value: &T) -> Res {
    Ok(Output::Json(serde_json::to_value(value).map_err(ssakit::SsaError::from)?))
}

fn read_series(path: &Path) -> Result<Series, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(Series::read_csv(file)?)
}

fn complete_series(path: &Path) -> Result<Series, CliError> {
    let series = read_series(path)?;
    if series.has_missing() {
        return Err(SsaError::MissingSamples.into());
    }
    Ok(series)
}

fn window_for(source: &Source, n: usize, method: Method) -> usize {
    source.window.unwrap_or_else(|| default_window(n, method))
}

/// Decomposes a CSV series, or loads a decomposition JSON document.
fn load_decomposition(a: &DecomposeArgs) -> Result<Decomposition, CliError> {
    let path = &a.source.input;
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        let doc: DecompositionDoc = serde_json::from_str(&text).map_err(SsaError::from)?;
        return Ok(Decomposition::from_json(doc)?);
    }
    let series = Series::read_csv(text.as_bytes())?;
    if series.has_missing() {
        return Err(SsaError::MissingSamples.into());
    }
    let method = match a.method {
        MethodArg::Basic => Method::Basic,
        MethodArg::Toeplitz => Method::Toeplitz,
    };
    let centering = match a.centering {
        CenteringArg::None => Centering::None,
        CenteringArg::Double => Centering::Double,
    };
    let window = window_for(&a.source, series.len(), method);
    Ok(decompose(&series, window, a.components, method, centering, &SvdOptions::default())?)
}

fn selection(sel: &Selection) -> Vec<usize> {
    match (&sel.components, sel.rank) {
        (Some(list), _) => list.clone(),
        (None, Some(r)) => (1..=r).collect(),
        (None, None) => unreachable!("clap enforces one of --rank/--components"),
    }
}

/// Decomposition holding the selected components. A `--rank` above the
/// numerical rank of the series is reduced to it.
fn signal_decomposition(series: &Series, window: usize, sel: &Selection) -> Result<(Decomposition, Vec<usize>), CliError> {
    let mut group = selection(sel);
    let k = group.iter().copied().max().unwrap_or(0);
    let dec = decompose_basic(series, window, k)?;
    if sel.rank.is_some() && dec.len() < k {
        eprintln!("warning: numerical rank is {}, using components 1..={}", dec.len(), dec.len());
        group.truncate(dec.len());
    }
    Ok((dec, group))
}

fn csv_columns(names: &[String], columns: &[&[f64]]) -> String {
    let mut out = names.join(",");
    out.push('\n');
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| format_g17(c[i])).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn value_csv(values: &[f64]) -> String {
    csv_columns(&["value".into()], &[values])
}

pub fn decompose_cmd(a: &DecomposeArgs) -> Res {
    let dec = load_decomposition(a)?;
    json(&dec.to_json())
}

fn parse_inline_groups(specs: &[String]) -> Result<Grouping, CliError> {
    let mut grouping = Grouping::new();
    for spec in specs {
        let (name, list) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("group '{spec}' is not of the form name=1,2,3")))?;
        let indices = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Usage(format!("group '{spec}': {e}")))?;
        grouping.insert(name.trim(), indices)?;
    }
    Ok(grouping)
}

pub fn reconstruct_cmd(a: &ReconstructArgs, as_json: bool) -> Res {
    let dec = load_decomposition(&a.decompose)?;
    let grouping = if let Some(path) = &a.grouping {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Grouping::from_json(&text)?
    } else if !a.group.is_empty() {
        parse_inline_groups(&a.group)?
    } else {
        Grouping::new().with_group("signal", 1..=dec.len())?
    };
    let rec = reconstruct(&dec, &grouping)?;
    if as_json {
        return json(&rec);
    }
    let mut names: Vec<String> = rec.groups.keys().cloned().collect();
    let mut cols: Vec<&[f64]> = rec.groups.values().map(|v| v.as_slice()).collect();
    if let Some(c) = &rec.centering {
        names.push("centering".into());
        cols.push(c);
    }
    names.push("residual".into());
    cols.push(&rec.residual);
    Ok(Output::Text(csv_columns(&names, &cols)))
}

pub fn wcor_cmd(a: &WcorArgs, as_json: bool) -> Res {
    let dec = load_decomposition(&a.decompose)?;
    let w = wcor(&dec, a.up_to.unwrap_or(dec.len()))?;
    if as_json {
        return json(&serde_json::json!({ "size": w.size(), "values": w.rows(), "zero_norm": w.zero_norm() }));
    }
    let mut buf = Vec::new();
    w.write_csv(&mut buf)?;
    Ok(Output::Text(String::from_utf8(buf).expect("formatted numbers are ASCII")))
}

pub fn autogroup_cmd(a: &AutogroupArgs, as_json: bool) -> Res {
    let dec = load_decomposition(&a.decompose)?;
    if let Some(n) = a.clusters {
        let grouping = cluster_groups(&wcor(&dec, dec.len())?, n)?;
        return Ok(Output::Json(serde_json::from_str(&grouping.to_json()).map_err(SsaError::from)?));
    }
    let trend = auto_trend(&dec, a.omega0, a.trend_threshold)?;
    let tol = a.freq_tol.unwrap_or(1.0 / dec.window().window_len() as f64);
    let pairs = auto_periodic_pairs(&dec, tol, a.share)?;
    let mut grouping = Grouping::new();
    if !trend.is_empty() {
        grouping.insert("trend", trend.iter().copied())?;
    }
    for (i, p) in pairs.iter().enumerate() {
        grouping.insert(format!("harmonic{}", i + 1), [p.first, p.second])?;
    }
    if as_json {
        let groups: serde_json::Value = serde_json::from_str(&grouping.to_json()).map_err(SsaError::from)?;
        return json(&serde_json::json!({ "grouping": groups, "trend": trend, "pairs": pairs }));
    }
    Ok(Output::Json(serde_json::from_str(&grouping.to_json()).map_err(SsaError::from)?))
}

fn forecast_csv(n: usize, result: &ForecastResult) -> String {
    let mut out = String::from("index,point,lower,upper\n");
    for (i, point) in result.forecast.iter().enumerate() {
        let (lo, hi) = match &result.intervals {
            Some(iv) => (format_g17(iv.lower[i]), format_g17(iv.upper[i])),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(out, "{},{},{lo},{hi}", n + i + 1, format_g17(*point));
    }
    out
}

pub fn forecast_cmd(a: &ForecastArgs, as_json: bool) -> Res {
    let series = complete_series(&a.source.input)?;
    let window = window_for(&a.source, series.len(), Method::Basic);
    let method = match a.method {
        ForecastMethodArg::Recurrent => ForecastMethod::Recurrent,
        ForecastMethodArg::Vector => ForecastMethod::Vector,
    };
    let result = if a.intervals {
        let opts = BootstrapOptions {
            replications: a.bootstrap,
            level: a.level,
            seed: a.seed,
            kind: match a.interval_kind {
                IntervalKindArg::Prediction => ssakit::predict::IntervalKind::Prediction,
                IntervalKindArg::Confidence => ssakit::predict::IntervalKind::Confidence,
            },
            noise: match a.noise {
                NoiseArg::Gaussian => ssakit::predict::NoiseModel::Gaussian,
                NoiseArg::Resample => ssakit::predict::NoiseModel::Resample,
            },
            method,
        };
        bootstrap_group_intervals(&series, window, &selection(&a.selection), a.horizon, &opts)?
    } else {
        let (dec, group) = signal_decomposition(&series, window, &a.selection)?;
        forecast(&dec, &group, a.horizon, method)?
    };
    if as_json {
        return json(&result);
    }
    Ok(Output::Text(forecast_csv(series.len(), &result)))
}

pub fn gapfill_cmd(a: &GapfillArgs, as_json: bool) -> Res {
    let series = read_series(&a.source.input)?;
    let window = window_for(&a.source, series.len(), Method::Basic);
    let result = match a.method {
        GapfillMethodArg::Iterative => gapfill_iterative(&series, window, a.rank, a.tol, a.max_iter)?,
        GapfillMethodArg::Subspace => gapfill_subspace(&series, window, a.rank)?,
    };
    if !result.converged {
        eprintln!("warning: gap filling did not converge after {} iterations", result.iterations);
    }
    if as_json {
        return json(&result);
    }
    Ok(Output::Text(value_csv(&result.completed)))
}

/// The `r` largest-modulus roots (conjugate pairs kept together).
fn leading_roots(mut roots: Vec<Root>, r: usize) -> Vec<Root> {
    roots.sort_by(|a, b| b.value.norm().total_cmp(&a.value.norm()).then(b.value.im.total_cmp(&a.value.im)));
    let mut out = Vec::new();
    let mut count = 0;
    for root in roots {
        let partner_pending = out
            .last()
            .is_some_and(|p: &Root| p.value.im > 0.0 && (p.value.conj() - root.value).norm() <= ROOT_CLUSTER_TOL * (1.0 + root.value.norm()));
        if count >= r && !partner_pending {
            break;
        }
        count += root.multiplicity;
        out.push(root);
    }
    out
}

pub fn estimate_cmd(a: &EstimateArgs, as_json: bool) -> Res {
    let series = complete_series(&a.source.input)?;
    let window = window_for(&a.source, series.len(), Method::Basic);
    let (dec, group) = signal_decomposition(&series, window, &a.selection)?;
    let subspace = SubspaceModel::from_decomposition(&dec, &group)?;
    let roots = match a.roots {
        RootsArg::Esprit => esprit(&subspace)?.into_iter().map(Root::simple).collect(),
        RootsArg::Lrr => leading_roots(char_roots(&minnorm_lrr(&subspace)?), group.len()),
    };
    let zero_based: Vec<usize> = group.iter().map(|i| i - 1).collect();
    let signal = dec.reconstruct_indices(&zero_based)?;
    let model = estimate_amplitudes(&signal, &roots)?;
    if model.condition > CONDITION_WARNING {
        eprintln!("warning: Vandermonde condition number {:e}", model.condition);
    }
    if as_json {
        return json(&model.to_json());
    }
    let mut out = String::from("A,rho,omega,phi,degree,period\n");
    for t in &model.terms {
        let period = if t.omega > 0.0 { format_g17(1.0 / t.omega) } else { "inf".into() };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{period}",
            format_g17(t.amplitude),
            format_g17(t.rho),
            format_g17(t.omega),
            format_g17(t.phi),
            t.degree
        );
    }
    Ok(Output::Text(out))
}

pub fn cadzow_cmd(a: &CadzowArgs, as_json: bool) -> Res {
    let series = complete_series(&a.source.input)?;
    let window = window_for(&a.source, series.len(), Method::Basic);
    let result = cadzow(&series, window, a.rank, a.max_iter, a.tol)?;
    if !result.converged {
        eprintln!("warning: Cadzow iterations did not converge after {}", result.iterations);
    }
    if as_json {
        return json(&result);
    }
    Ok(Output::Text(value_csv(&result.signal)))
}

pub fn rank_cmd(a: &RankArgs, as_json: bool) -> Res {
    let series = complete_series(&a.source.input)?;
    let window = window_for(&a.source, series.len(), Method::Basic);
    let criterion = match a.criterion {
        CriterionArg::Aic => Criterion::Aic,
        CriterionArg::Bic => Criterion::Bic,
    };
    let estimator = match a.estimator {
        EstimatorArg::Cadzow => Estimator::Cadzow,
        EstimatorArg::Ssa => Estimator::Ssa,
    };
    let sel = rank_select(&series, window, a.rank, criterion, estimator)?;
    if as_json {
        return json(&sel);
    }
    let mut out = String::from("rank,rss,aic,bic\n");
    for i in 0..sel.ranks.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            sel.ranks[i],
            format_g17(sel.rss[i]),
            format_g17(sel.aic[i]),
            format_g17(sel.bic[i])
        );
    }
    let _ = writeln!(out, "# chosen rank {}", sel.chosen);
    Ok(Output::Text(out))
}

pub fn detect_cmd(a: &DetectArgs, as_json: bool) -> Res {
    let series = complete_series(&a.source.input)?;
    let window = window_for(&a.source, series.len(), Method::Basic);
    let opts = McssaOptions {
        gamma: a.gamma,
        surrogates: a.surrogates,
        seed: a.seed,
        correction: match a.correction {
            CorrectionArg::None => Correction::None,
            CorrectionArg::Bonferroni => Correction::Bonferroni,
        },
        components: a.components,
    };
    let report = mcssa_test(&series, window, &opts)?;
    if as_json {
        return json(&report);
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "AR(1) null: phi = {:.6}, sigma = {:.6}, mean = {:.6}",
        report.model.phi, report.model.sigma, report.model.mean
    );
    let _ = writeln!(
        out,
        "gamma = {}, correction = {:?}, per-vector alpha = {:.6}, surrogates = {}, seed = {}",
        report.gamma, report.correction, report.per_vector_alpha, report.surrogates, report.seed
    );
    let _ = writeln!(out, "{:>5}  {:>14}  {:>14}  {:>14}  rejected", "index", "statistic", "lower", "upper");
    for t in &report.tests {
        let _ = writeln!(
            out,
            "{:>5}  {:>14.6e}  {:>14.6e}  {:>14.6e}  {}",
            t.index,
            t.statistic,
            t.lower,
            t.upper,
            if t.rejected { "yes" } else { "no" }
        );
    }
    let _ = writeln!(out, "null rejected: {}", if report.rejected { "yes" } else { "no" });
    Ok(Output::Text(out))
}
