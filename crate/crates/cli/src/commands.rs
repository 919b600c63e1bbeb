use std::fmt::Write as _;
use std::path::Path;

use coxinv_core::chevalley::{basic_invariants, rewrite_invariant_polynomial, ChevalleyMap};
use coxinv_core::geometry::{default_tol, fundamental_domain_rep, regularity_probe, stratify, ProbeConfig};
use coxinv_core::groups::{build_group, orbit, GroupData, GroupSpec};
use coxinv_core::jets::{r_regularity_probe, seminorms, Jet, JetField, ProbeOptions};
use coxinv_core::scalar::{norm_sq, parse_point, point_to_json, sub_vec};
use coxinv_core::transfer::{compose_jet, continuity_ledger, cramer_first_derivatives, recover_jet, weighted_seminorm, CramerSystem};
use coxinv_core::verify::verify_all;
use coxinv_core::{Error, Poly, Rational, Scalar};
use serde_json::{json, Value};

use crate::{Command, Common, Failure};

pub struct Output {
    pub json: Value,
    pub table: Option<String>,
    pub failure: Option<Failure>,
}

impl Output {
    fn json(json: Value) -> Self {
        Output { json, table: None, failure: None }
    }

    fn with_table(json: Value, table: String) -> Self {
        Output { json, table: Some(table), failure: None }
    }
}

pub fn run(cmd: &Command, common: &Common) -> Result<Output, Failure> {
    let spec = common.group.as_deref().ok_or_else(|| Failure::Config("--group is required".into()))?;
    let spec = GroupSpec::parse(spec)?;
    let g = build_group(&spec)?;
    if let Some(t) = common.tol {
        if t.is_nan() || t < 0.0 {
            return Err(Failure::Config(format!("--tol must be non-negative, got {t}")));
        }
    }
    match cmd {
        Command::GroupInfo => Ok(group_info(&g)),
        Command::VerifyAll => {
            let report = verify_all(&spec, common.seed)?;
            let mut table = format!("{} ({} path)\n", spec, if report.exact { "exact" } else { "float" });
            for c in &report.checks {
                let _ = writeln!(table, "{:<24} {}  {}", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
            }
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            let mut out = Output::with_table(report.to_json(), table);
            if failed > 0 {
                out.failure = Some(Failure::Verify(format!("{failed} check(s) failed")));
            }
            Ok(out)
        }
        _ => {
            let exact = common.exact || (!common.float && g.is_rational());
            if exact {
                typed::<Rational>(cmd, common, &g)
            } else {
                typed::<f64>(cmd, common, &g)
            }
        }
    }
}

fn group_info(g: &GroupData) -> Output {
    let table = format!(
        "group   {}\ndim     {}\ndegrees {:?}\nh       {}\nd       {}\norder   {}",
        g.spec,
        g.dim,
        g.degrees,
        g.h,
        g.d,
        coxinv_core::groups::group_order(g)
    );
    Output::with_table(g.to_json(), table)
}

fn read_text(arg: &str) -> Result<String, Failure> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn read_json(text: &str) -> Result<Value, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Config(format!("invalid JSON: {e}")))
}

fn read_field<S: Scalar>(path: &Path) -> Result<JetField<S>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok(JetField::from_json(&read_json(&text)?)?)
}

fn points<S: Scalar>(arg: &str, dim: usize) -> Result<Vec<Vec<S>>, Failure> {
    arg.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let x = parse_point::<S>(s)?;
            if x.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: x.len() }.into());
            }
            Ok(x)
        })
        .collect()
}

fn point<S: Scalar>(arg: &str, dim: usize) -> Result<Vec<S>, Failure> {
    let mut pts = points(arg, dim)?;
    if pts.len() != 1 {
        return Err(Failure::Config(format!("expected one point, got {}", pts.len())));
    }
    Ok(pts.remove(0))
}

fn poly<S: Scalar>(arg: &str, nvars: usize) -> Result<Poly<S>, Failure> {
    Ok(Poly::from_json(&read_json(&read_text(arg)?)?, nvars)?)
}

fn values<S: Scalar>(v: &[S]) -> Value {
    point_to_json(v)
}

/// Jet of the field whose base is closest to `y`.
fn nearest<'a, S: Scalar>(field: &'a JetField<S>, y: &[S]) -> Result<&'a Jet<S>, Failure> {
    field
        .points
        .iter()
        .min_by(|a, b| {
            let da = norm_sq(&sub_vec(&a.base, y)).to_f64();
            let db = norm_sq(&sub_vec(&b.base, y)).to_f64();
            da.total_cmp(&db)
        })
        .ok_or_else(|| Failure::Config("empty jet field".into()))
}

fn stratum_tol<S: Scalar>(common: &Common, x: &[S]) -> f64 {
    match common.tol {
        Some(t) => t,
        None if S::EXACT => 0.0,
        None => default_tol(x),
    }
}

fn typed<S: Scalar>(cmd: &Command, common: &Common, g: &GroupData) -> Result<Output, Failure> {
    let map: ChevalleyMap<S> = basic_invariants(g)?;
    let n = g.dim;
    let m = map.polys.len();
    Ok(match cmd {
        Command::Invariants => {
            let names = map.variable_names();
            let table = map
                .to_json()
                .get("pretty")
                .and_then(Value::as_array)
                .map(|ps| {
                    ps.iter()
                        .zip(&names)
                        .map(|(p, name)| format!("{name} = {}", p.as_str().unwrap_or_default()))
                        .collect::<Vec<_>>()
                        .join("\n")
                })
                .unwrap_or_default();
            Output::with_table(map.to_json(), table)
        }
        Command::Eval { x } => Output::json(values(&map.eval(&point::<S>(x, n)?)?)),
        Command::JacobianCheck => {
            let f = map.verify_jacobian_factorization()?;
            let json = json!({
                "group": g.spec.to_json(),
                "c": f.c.to_json(),
                "residual_norm": f.residual_norm(),
                "determinant": f.determinant.to_json(),
            });
            let table = format!("c = {}\nresidual = {:e}", f.c.to_json(), f.residual_norm());
            Output::with_table(json, table)
        }
        Command::Rewrite { poly: arg } => {
            let f = poly::<S>(arg, n)?;
            let big_f = rewrite_invariant_polynomial(&map, &f)?;
            let table = big_f.display_with(&map.variable_names());
            Output::with_table(json!({"F": big_f.to_json(), "pretty": table}), table)
        }
        Command::Compose { input, poly: arg, x, r } => {
            let pts = points::<S>(x, n)?;
            let field = match (input, arg) {
                (Some(path), None) => read_field::<S>(path)?,
                (None, Some(arg)) => {
                    let big_f = poly::<S>(arg, m)?;
                    let images = pts.iter().map(|a| map.eval(a)).collect::<Result<Vec<_>, _>>()?;
                    JetField::from_poly(&big_f, &images, *r)?
                }
                _ => return Err(Failure::Config("compose needs exactly one of --input or --poly".into())),
            };
            let jets = pts
                .iter()
                .map(|a| {
                    let y = map.eval(a)?;
                    Ok(compose_jet(&map, nearest(&field, &y)?, a)?)
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            Output::json(JetField::new(field.order * map.h(), jets)?.to_json())
        }
        Command::Recover { input, x, r } => {
            let field = read_field::<S>(input)?;
            let pts = match x {
                Some(x) => points::<S>(x, n)?,
                None => field.points.iter().map(|j| j.base.clone()).collect(),
            };
            let jets = pts.iter().map(|a| recover_jet(&map, &field, a, *r)).collect::<Result<Vec<_>, _>>()?;
            Output::json(JetField::new(*r, jets)?.to_json())
        }
        Command::Cramer { x, grad, poly: arg, system } => {
            let x = point::<S>(x, n)?;
            let grad = match (grad, arg) {
                (Some(gr), None) => point::<S>(gr, n)?,
                (None, Some(arg)) => poly::<S>(arg, n)?
                    .gradient()
                    .iter()
                    .map(|p| p.evaluate(&x))
                    .collect::<Result<Vec<_>, _>>()?,
                _ => return Err(Failure::Config("cramer needs exactly one of --grad or --poly".into())),
            };
            let v = cramer_first_derivatives(&map, &grad, &x)?;
            let mut json = json!({"x": values(&x), "y": values(&map.eval(&x)?), "gradient": values(&grad), "dF": values(&v)});
            if *system {
                json["system"] = CramerSystem::new(&map).to_json();
            }
            Output::json(json)
        }
        Command::Ledger { r, stratum } => {
            let info = match stratum {
                Some(s) => {
                    let x = point::<S>(s, n)?;
                    Some(stratify(g, &x, stratum_tol(common, &x))?)
                }
                None => None,
            };
            let entries = continuity_ledger(&map, *r, info.as_ref());
            let mut table = format!("{:<16} {:>6} {:>8}  verdict\n", "beta", "wk", "wk_S");
            for e in &entries {
                let _ = writeln!(
                    table,
                    "{:<16} {:>6} {:>8}  {}",
                    format!("{:?}", e.beta.exponents()),
                    e.weighted_order,
                    e.stratum_weighted_order.map_or("-".to_string(), |w| w.to_string()),
                    e.verdict.label()
                );
            }
            let json = json!({
                "group": g.spec.to_json(),
                "r": r,
                "hr": map.h() * r,
                "stratum": info.as_ref().map(|s| s.to_json()),
                "entries": entries.iter().map(|e| e.to_json()).collect::<Vec<_>>(),
            });
            Output::with_table(json, table)
        }
        Command::Seminorm { input, r, hr, x, probe } => {
            let field = read_field::<S>(input)?;
            match hr {
                Some(hr) => {
                    let samples = points::<S>(x.as_deref().unwrap_or_default(), n)?;
                    Output::json(weighted_seminorm(&map, &field, *r, *hr, &samples)?.to_json())
                }
                None => {
                    let mut json = seminorms(&field, *r)?.to_json();
                    if *probe {
                        json["probe"] = r_regularity_probe(&field, *r, ProbeOptions::default())?.to_json();
                    }
                    Output::json(json)
                }
            }
        }
        Command::Stratify { x } => {
            let x = point::<S>(x, n)?;
            Output::json(stratify(g, &x, stratum_tol(common, &x))?.to_json())
        }
        Command::Orbit { x } => {
            let x = point::<S>(x, n)?;
            let o = orbit(g, &x)?;
            let rep = fundamental_domain_rep(g, &x)?;
            Output::json(json!({
                "x": values(&x),
                "size": o.len(),
                "orbit": o.iter().map(|p| values(p)).collect::<Vec<_>>(),
                "representative": values(&rep),
            }))
        }
        Command::ProbeRegularity { radius, samples, k } => {
            if radius.is_nan() || *radius <= 0.0 || *samples < 8 || *k == 0 {
                return Err(Failure::Config("need radius > 0, samples ≥ 8 and k ≥ 1".into()));
            }
            let cfg = ProbeConfig { radius: *radius, samples: *samples, k_neighbors: *k, seed: common.seed, ..ProbeConfig::default() };
            Output::json(regularity_probe(&map, &cfg)?.to_json())
        }
        Command::GroupInfo | Command::VerifyAll => unreachable!("handled before mode dispatch"),
    })
}
