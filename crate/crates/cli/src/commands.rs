//! One function per subcommand, each producing a table.

use kouexp::expfun::{self, ExpFunctionalQuery, Side};
use kouexp::gbm::{gbm_cdf, gbm_tail_expectation, GbmDerived};
use kouexp::mc::{estimate_tail_prob, ConcordanceRow, SimConfig};
use kouexp::presets::{self, TABLE1_LAMBDAS, TABLE1_LEVELS, TABLE3_LEVELS};
use kouexp::risk::LiabilityModel;
use kouexp::{kou, Complex64, Contract, ExpSum, KouParams};

use crate::config::{Model, Resolved};
use crate::output::{Cell, Table};
use crate::Failure;

/// Decimals of the published risk-measure table.
const TABLE3_PLACES: usize = 6;

fn liability(contract: &Contract, sum: &ExpSum) -> Result<LiabilityModel, Failure> {
    LiabilityModel::new(contract, sum).map_err(|e| Failure::numerical("risk::LiabilityModel::new", e))
}

pub fn roots(cfg: &Resolved, q: Complex64) -> Result<Table, Failure> {
    let mut t = Table::new(&["name", "re", "im"]);
    let row = |name: &str, z: Complex64| vec![Cell::Text(name.into()), Cell::Num(z.re), Cell::Num(z.im)];
    if cfg.model == Model::Gbm || cfg.equity.lambda == 0.0 {
        let d = GbmDerived::new(q, cfg.equity.mu, cfg.equity.sigma).map_err(|e| Failure::numerical("gbm::GbmDerived::new", e))?;
        t.push(row("zeta1", d.zeta1()));
        t.push(row("-zeta_hat1", -(d.eta - d.kappa + 0.5)));
        return Ok(t);
    }
    let rs = kou::solve_roots(&cfg.equity, q).map_err(|e| Failure::numerical("kou::solve_roots", e))?;
    t.push(row("-zeta_hat2", -rs.zeta_hat2));
    t.push(row("-rho_hat", Complex64::new(-rs.rho_hat, 0.0)));
    t.push(row("-zeta_hat1", -rs.zeta_hat1));
    t.push(row("zeta1", rs.zeta1));
    t.push(row("rho", Complex64::new(rs.rho, 0.0)));
    t.push(row("zeta2", rs.zeta2));
    Ok(t)
}

/// Density, cdf and truncated first moments of I_{x,q} on a grid of thresholds.
pub fn dist(cfg: &Resolved, x: f64, q: f64, ys: &[f64]) -> Result<Table, Failure> {
    let mut t = Table::new(&["y", "density", "cdf", "mean_below", "mean_above"]);
    let qc = Complex64::new(q, 0.0);
    // E[I] is infinite unless q > ψ(1); the upper truncated mean is then left blank.
    let psi1 = kou::laplace_exponent(&cfg.equity, Complex64::new(1.0, 0.0)).map_err(|e| Failure::numerical("kou::laplace_exponent", e))?;
    let finite_mean = q > psi1.re;
    let above_cell = |v: f64| if finite_mean { Cell::Num(v) } else { Cell::Empty };
    if cfg.equity.lambda == 0.0 {
        let (mu, sigma) = (cfg.equity.mu, cfg.equity.sigma);
        for &y in ys {
            let f = |e| Failure::numerical("gbm", e);
            let cdf = gbm_cdf(x, qc, mu, sigma, y).map_err(f)?;
            let below = gbm_tail_expectation(x, qc, mu, sigma, y, Side::Below).map_err(f)?;
            let above = if finite_mean { gbm_tail_expectation(x, qc, mu, sigma, y, Side::Above).map_err(f)?.re } else { f64::NAN };
            t.push(vec![Cell::Param(y), Cell::Empty, Cell::Num(cdf.re), Cell::Num(below.re), above_cell(above)]);
        }
        return Ok(t);
    }
    let query = ExpFunctionalQuery::new(cfg.equity, x, qc).map_err(|e| Failure::numerical("expfun::query", e))?;
    for &y in ys {
        let density = expfun::density(&query, y).map_err(|e| Failure::numerical("expfun::density", e))?;
        let cdf = expfun::cdf(&query, y).map_err(|e| Failure::numerical("expfun::cdf", e))?;
        let te = |side| expfun::tail_expectation(&query, y, side).map_err(|e| Failure::numerical("expfun::tail_expectation", e));
        let above = if finite_mean { te(Side::Above)? } else { f64::NAN };
        t.push(vec![Cell::Param(y), Cell::Num(density), Cell::Num(cdf), Cell::Num(te(Side::Below)?), above_cell(above)]);
    }
    Ok(t)
}

pub fn expsum_table(sum: &ExpSum) -> Table {
    let mut t = Table::new(&["s_re", "s_im", "w_re", "w_im"]);
    for k in &sum.terms {
        t.push(vec![Cell::Num(k.s_re), Cell::Num(k.s_im), Cell::Num(k.w_re), Cell::Num(k.w_im)]);
    }
    t
}

pub fn tailprob(cfg: &Resolved, sum: &ExpSum, levels: &[f64]) -> Result<Table, Failure> {
    let model = liability(&cfg.contract(cfg.equity), sum)?;
    let mut t = Table::new(&["V", "tail_probability", "imag_residual", "terms_used", "beyond_support"]);
    for &v in levels {
        let r = model.tail_probability(v).map_err(|e| Failure::numerical("risk::tail_probability", e))?;
        t.push(vec![
            Cell::Param(v),
            Cell::Num(r.value),
            Cell::Num(r.imag_residual),
            Cell::Int(r.terms_used as u64),
            Cell::Bool(r.beyond_support),
        ]);
    }
    Ok(t)
}

pub fn var(cfg: &Resolved, sum: &ExpSum, levels: &[f64]) -> Result<Table, Failure> {
    let model = liability(&cfg.contract(cfg.equity), sum)?;
    let mut t = Table::new(&["p", "var", "bracket_lo", "bracket_hi", "imag_residual", "terms_used"]);
    for &p in levels {
        let r = model.value_at_risk(p).map_err(|e| Failure::numerical("risk::value_at_risk", e))?;
        t.push(vec![
            Cell::Param(p),
            Cell::Num(r.report.value),
            Cell::Num(r.bracket[0]),
            Cell::Num(r.bracket[1]),
            Cell::Num(r.report.imag_residual),
            Cell::Int(r.report.terms_used as u64),
        ]);
    }
    Ok(t)
}

/// CTE at each level; the VaR is computed unless given (only allowed with a single level).
pub fn cte(cfg: &Resolved, sum: &ExpSum, levels: &[f64], given_var: Option<f64>) -> Result<Table, Failure> {
    if given_var.is_some() && levels.len() != 1 {
        return Err(Failure::Schema("--var needs exactly one confidence level".into()));
    }
    let model = liability(&cfg.contract(cfg.equity), sum)?;
    let mut t = Table::new(&["p", "var", "cte", "imag_residual", "terms_used"]);
    for &p in levels {
        let v = match given_var {
            Some(v) => v,
            None => model.value_at_risk(p).map_err(|e| Failure::numerical("risk::value_at_risk", e))?.report.value,
        };
        let r = model.cte(p, v).map_err(|e| Failure::numerical("risk::cte", e))?;
        t.push(vec![Cell::Param(p), Cell::Num(v), Cell::Num(r.value), Cell::Num(r.imag_residual), Cell::Int(r.terms_used as u64)]);
    }
    Ok(t)
}

/// Monte Carlo estimates next to the analytic tail probabilities.
pub fn mc(cfg: &Resolved, sum: &ExpSum, equity: KouParams, levels: &[f64], sim: &SimConfig) -> Result<Table, Failure> {
    let contract = cfg.contract(equity);
    let est = estimate_tail_prob(&contract, &cfg.mortality, levels, sim)
        .map_err(|e| Failure::numerical("mc::estimate_tail_prob", e))?;
    let model = liability(&contract, sum)?;
    let mut t = Table::new(&["V", "mc_mean", "mc_std", "analytic", "abs_diff", "within_3std"]);
    for e in &est {
        let exact = model.tail_probability(e.v).map_err(|err| Failure::numerical("risk::tail_probability", err))?;
        let r = ConcordanceRow::new(e, exact.value);
        t.push(vec![
            Cell::Param(r.v),
            Cell::Num(r.mc_mean),
            Cell::Num(r.mc_std),
            Cell::Num(r.analytic),
            Cell::Num(r.abs_diff),
            Cell::Bool(r.within_3std),
        ]);
    }
    Ok(t)
}

fn lambda_column(lambda: f64) -> String {
    if lambda == 0.0 {
        "gbm".into()
    } else {
        format!("lambda_{lambda}")
    }
}

/// Tail probabilities at the study's loss levels, one column per jump intensity.
pub fn table1(cfg: &Resolved, sum: &ExpSum) -> Result<Table, Failure> {
    let names: Vec<String> = std::iter::once("V".to_string()).chain(TABLE1_LAMBDAS.iter().map(|&l| lambda_column(l))).collect();
    let mut t = Table { columns: names, rows: Vec::new() };
    let mut columns = Vec::new();
    for lambda in TABLE1_LAMBDAS {
        let model = liability(&cfg.contract(presets::kou_table1().with_lambda(lambda)), sum)?;
        let col = TABLE1_LEVELS
            .iter()
            .map(|&v| model.tail_probability(v).map(|r| r.value))
            .collect::<kouexp::Result<Vec<f64>>>()
            .map_err(|e| Failure::numerical("risk::tail_probability", e))?;
        columns.push(col);
    }
    for (i, &v) in TABLE1_LEVELS.iter().enumerate() {
        t.push(std::iter::once(Cell::Param(v)).chain(columns.iter().map(|c| Cell::Num(c[i]))).collect());
    }
    Ok(t)
}

/// VaR and CTE for the two jump parameter sets, rounded for presentation.
pub fn table3(cfg: &Resolved, sum: &ExpSum) -> Result<Table, Failure> {
    let mut t = Table::new(&["set", "p", "var", "cte"]);
    for (name, equity) in [("set-A", presets::set_a()), ("set-B", presets::set_b())] {
        let model = liability(&cfg.contract(equity), sum)?;
        for p in TABLE3_LEVELS {
            let v = model.value_at_risk(p).map_err(|e| Failure::numerical("risk::value_at_risk", e))?.report.value;
            let c = model.cte(p, v).map_err(|e| Failure::numerical("risk::cte", e))?.value;
            t.push(vec![
                Cell::Text(name.into()),
                Cell::Param(p),
                Cell::Fixed(v, TABLE3_PLACES),
                Cell::Fixed(c, TABLE3_PLACES),
            ]);
        }
    }
    Ok(t)
}

/// P(L > V) on a uniform grid, one column per equity model.
pub fn tailcurve(cfg: &Resolved, sum: &ExpSum, sets: &[(String, KouParams)], grid: &[f64]) -> Result<Table, Failure> {
    let names: Vec<String> = std::iter::once("V".to_string()).chain(sets.iter().map(|(n, _)| n.clone())).collect();
    let mut columns = Vec::new();
    for (_, equity) in sets {
        let model = liability(&cfg.contract(*equity), sum)?;
        let col = grid
            .iter()
            .map(|&v| model.tail_probability(v).map(|r| r.value))
            .collect::<kouexp::Result<Vec<f64>>>()
            .map_err(|e| Failure::numerical("risk::tail_probability", e))?;
        columns.push(col);
    }
    let mut t = Table { columns: names, rows: Vec::new() };
    for (i, &v) in grid.iter().enumerate() {
        t.push(std::iter::once(Cell::Param(v)).chain(columns.iter().map(|c| Cell::Num(c[i]))).collect());
    }
    Ok(t)
}

/// `points` equally spaced values from `lo` to `hi` inclusive.
pub fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, Failure> {
    if points < 2 || !(hi > lo) {
        return Err(Failure::Schema(format!("grid needs hi > lo and at least 2 points, got [{lo}, {hi}] x {points}")));
    }
    Ok((0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect())
}
