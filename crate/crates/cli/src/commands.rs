use std::fs;
use std::path::Path;

use asympt::delta::{audit_delta, build_cutoff, DeltaNet};
use asympt::dist::{pair, parse_distribution};
use asympt::domain::{CompactWindow, Domain1D};
use asympt::embed::{check_pairing_preservation, classify, embed_distribution, parse_test_function, product_experiment, rep_pair};
use asympt::exact::{Enclosure, Value};
use asympt::expansion::{fit_expansion, EpsLadder, ExpansionFit, Grid};
use asympt::field::{eval_expr, puiseux_roots};
use asympt::mollifier::{build_base, build_mollifier, default_l1_tol, default_m, exponent_report, find_epsilon_with, Mollifier, MollifierFile};
use asympt::scalar::{parse_rational, rational_to_f64};
use asympt::{PiecewisePoly, Rational};
use num_traits::Zero;
use serde_json::{json, Value as Json};

use crate::{Cli, Command, CutoffCmd, DeltaCmd, DistCmd, EmbedArgs, ExpandCmd, FieldArgs, FitArgs, MollifierBuild, MollifierCmd, NetArgs, ProductArgs};

pub enum Failure {
    /// Bad flag values or unreadable inputs; nothing was computed.
    Usage(String),
    Compute(asympt::Error),
    /// Output files could not be written.
    Io(String),
}

impl From<asympt::Error> for Failure {
    fn from(e: asympt::Error) -> Self {
        Failure::Compute(e)
    }
}

type Out = Result<(), Failure>;

fn usage<T>(flag: &str, r: asympt::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Usage(format!("--{flag}: {e}")))
}

fn rational(flag: &str, text: &str) -> Result<Rational, Failure> {
    usage(flag, parse_rational(text))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn load_mollifier(path: &Path) -> Result<Mollifier, Failure> {
    let file: MollifierFile = serde_json::from_str(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(Mollifier::from_file(&file)?)
}

/// A spec string, or a path to a JSON piecewise polynomial.
fn test_function(flag: &str, text: &str) -> Result<PiecewisePoly, Failure> {
    let path = Path::new(text);
    if path.extension().is_some_and(|e| e == "json") || path.is_file() {
        return serde_json::from_str(&read(path)?).map_err(|e| Failure::Usage(format!("--{flag} {text}: {e}")));
    }
    usage(flag, parse_test_function(text))
}

fn pretty(v: &Json) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize")
}

fn to_json<T: serde::Serialize>(v: &T) -> Json {
    serde_json::to_value(v).expect("report types serialize")
}

/// Exact values print as rationals; enclosures as labeled decimal brackets.
fn enclosure(e: &Enclosure) -> String {
    if e.is_point() {
        e.lo.to_string()
    } else {
        format!("[{:.15e}, {:.15e}] (enclosure, width {:.2e})", rational_to_f64(&e.lo), rational_to_f64(&e.hi), rational_to_f64(&e.width()))
    }
}

fn value(v: &Value) -> String {
    enclosure(&v.to_enclosure())
}

pub fn run(cli: &Cli) -> Out {
    match &cli.command {
        Command::Mollifier(MollifierCmd::Build(b)) => mollifier_build(b, cli.json),
        Command::Mollifier(MollifierCmd::Audit { file, ladder }) => mollifier_audit(file, ladder, cli.json),
        Command::Delta(DeltaCmd::Audit { moll, epsilon, alpha_max }) => delta_audit(moll, epsilon, *alpha_max, cli.json),
        Command::Cutoff(CutoffCmd::Build { domain, epsilon, moll, out }) => cutoff_build(domain, epsilon, moll, out, cli.json),
        Command::Dist(DistCmd::Pair { dist, phi, tol }) => dist_pair(dist, phi, tol, cli.json),
        Command::Embed(a) => embed(a, cli.json),
        Command::Product(a) => product(a),
        Command::Expand(ExpandCmd::Fit { csv, grid, trunc, tol }) => expand_fit(csv, grid, trunc, tol, cli.json),
        Command::Field(a) => field(a, cli.json),
    }
}

fn moment_table(theta: &Mollifier) -> Vec<(usize, Rational)> {
    (0..=theta.k + 2).map(|i| (i, theta.moment_1d(i))).collect()
}

fn print_moments(theta: &Mollifier) {
    println!("{:>3}  moment", "i");
    for (i, v) in moment_table(theta) {
        println!("{i:>3}  {v}");
    }
}

fn mollifier_build(b: &MollifierBuild, json: bool) -> Out {
    let m = b.m.unwrap_or_else(|| default_m(b.k));
    let epsilon = b.epsilon.as_deref().map(|e| rational("epsilon", e)).transpose()?;
    let delta = rational("delta", &b.delta)?;
    if b.k == 0 {
        return Err(Failure::Usage("--k must be at least 1".into()));
    }
    let base = build_base(m)?;
    let (theta, search) = match &epsilon {
        Some(e) => (build_mollifier(b.k, e, &base, b.dim)?, None),
        None => {
            let s = find_epsilon_with(b.k, &delta, &base, b.dim, &default_l1_tol())?;
            (s.mollifier.clone(), Some(s))
        }
    };
    theta.verify(b.k)?;
    let l1 = match &search {
        Some(s) => s.l1.clone(),
        None => theta.l1_norm(&default_l1_tol())?,
    };
    write(&b.out, &pretty(&to_json(&theta.to_file())))?;
    let config = json!({
        "command": "mollifier build", "k": b.k, "m": m, "dim": b.dim,
        "epsilon": epsilon.as_ref().map(|e| e.to_string()),
        "delta": epsilon.is_none().then(|| delta.to_string()),
        "out": b.out.display().to_string(),
    });
    if json {
        let moments: Vec<Json> = moment_table(&theta).iter().map(|(i, v)| json!({"i": i, "value": v.to_string()})).collect();
        println!("{}", pretty(&json!({"config": config, "epsilon": theta.epsilon.to_string(), "moments": moments, "l1": to_json(&l1)})));
        return Ok(());
    }
    println!("k = {}, m = {m}, dim = {}, epsilon = {}", theta.k, theta.dim, theta.epsilon);
    if let Some(s) = &search {
        println!("search tried {} lattice points ({} monotonicity violations)", s.trace.len(), s.monotone_violations);
    }
    print_moments(&theta);
    println!("L1 = {}", enclosure(&l1));
    println!("wrote {}", b.out.display());
    Ok(())
}

fn mollifier_audit(file: &Path, ladder: &str, json: bool) -> Out {
    let lad = usage("ladder", EpsLadder::parse(ladder))?.points();
    let theta = load_mollifier(file)?;
    theta.verify(theta.k)?;
    let l1 = theta.l1_norm(&default_l1_tol())?;
    let report = exponent_report(theta.k, &lad)?;
    let moments: Vec<Json> = moment_table(&theta).iter().map(|(i, v)| json!({"i": i, "value": v.to_string()})).collect();
    let body = json!({
        "config": {"command": "mollifier audit", "file": file.display().to_string(), "ladder": ladder},
        "k": theta.k, "m": theta.m(), "epsilon": theta.epsilon.to_string(),
        "moments": moments, "l1": to_json(&l1), "exponents": to_json(&report),
    });
    if json {
        println!("{}", pretty(&body));
        return Ok(());
    }
    println!("k = {}, m = {}, epsilon = {}", theta.k, theta.m(), theta.epsilon);
    print_moments(&theta);
    println!("L1 = {}", enclosure(&l1));
    println!("{:>3}  {:>9}  {:>10}  match", "j", "predicted", "measured");
    for (j, ((p, m), ok)) in report.predicted.iter().zip(&report.measured).zip(&report.matches).enumerate() {
        println!("{j:>3}  {p:>9}  {m:>10.4}  {ok}");
    }
    println!("{}", pretty(&body));
    Ok(())
}

fn delta_audit(moll: &Path, epsilon: &str, alpha_max: usize, json: bool) -> Out {
    let eps = rational("epsilon", epsilon)?;
    let net = DeltaNet::new(load_mollifier(moll)?);
    let r = audit_delta(&net, &eps, alpha_max)?;
    if json {
        let config = json!({"command": "delta audit", "moll": moll.display().to_string(), "epsilon": eps.to_string(), "alpha_max": alpha_max});
        println!("{}", pretty(&json!({"config": config, "report": to_json(&r), "passes": r.passes()})));
        return Ok(());
    }
    println!("epsilon = {}, k = {}, dim = {}", r.epsilon, r.k, r.dim);
    println!("(i)   support radius {} inside the epsilon ball: {}", r.support_radius, r.support_in_ball);
    println!("(ii)  mass = {}", r.mass);
    println!("(iii) moments 1..{} vanish: {} (first nonzero: {:?})", r.k, r.moments_vanish, r.first_nonzero_moment);
    println!("(iv)  L1 = {}, excess = {}, at most 1/k: {}", enclosure(&r.l1), enclosure(&r.excess), r.excess_ok);
    println!("(v)   exact derivative scaling: {}", r.derivative_scaling_exact);
    println!("{:>6}  {:>24}  {:>24}", "alpha", "sup", "normalized");
    for d in &r.derivatives {
        println!("{:>6}  {:>24.6e}  {:>24.6e}", format!("{:?}", d.alpha), d.sup.mid_f64(), d.normalized.mid_f64());
    }
    println!("all properties hold: {}", r.passes());
    Ok(())
}

fn cutoff_build(domain: &str, epsilon: &str, moll: &Path, out: &Path, json: bool) -> Out {
    let dom = usage("domain", Domain1D::parse(domain))?;
    let eps = rational("epsilon", epsilon)?;
    let net = DeltaNet::new(load_mollifier(moll)?);
    let cut = build_cutoff(&dom, &eps, &net)?;
    write(out, &pretty(&to_json(&cut.to_file())))?;
    let plateau: Vec<Json> = cut.plateau().iter().map(|(a, b)| json!([a.to_string(), b.to_string()])).collect();
    if json {
        let config = json!({"command": "cutoff build", "domain": dom.to_string(), "epsilon": eps.to_string(), "moll": moll.display().to_string(), "out": out.display().to_string()});
        println!("{}", pretty(&json!({"config": config, "plateau": plateau, "probes": cut.probes, "warning": cut.warning})));
        return Ok(());
    }
    if let Some(w) = &cut.warning {
        println!("warning: {w}");
    }
    for (a, b) in cut.plateau() {
        println!("Π = 1 exactly on [{a}, {b}]");
    }
    println!("{} pieces, verified at {} exact points", cut.shape.pieces().len(), cut.probes);
    println!("wrote {}", out.display());
    Ok(())
}

fn dist_pair(dist: &str, phi: &str, tol: &str, json: bool) -> Out {
    let t = usage("dist", parse_distribution(dist))?;
    let f = test_function("phi", phi)?;
    let tol = rational("tol", tol)?;
    let v = pair(&t, &f, &tol)?;
    if json {
        let config = json!({"command": "dist pair", "dist": t.to_string(), "phi": phi, "tol": tol.to_string()});
        println!("{}", pretty(&json!({"config": config, "value": to_json(&v)})));
    } else {
        println!("<{t}, φ> = {}", value(&v));
    }
    Ok(())
}

struct Fit {
    ladder: Vec<Rational>,
    grid: Grid,
    trunc: Rational,
    tol: Rational,
}

fn fit_args(a: &FitArgs) -> Result<Fit, Failure> {
    Ok(Fit {
        ladder: usage("ladder", EpsLadder::parse(&a.ladder))?.points(),
        grid: usage("grid", Grid::parse(&a.grid))?,
        trunc: rational("trunc", &a.trunc)?,
        tol: rational("tol", &a.tol)?,
    })
}

fn net_config(n: &NetArgs) -> Json {
    match &n.moll {
        Some(p) => json!({"moll": p.display().to_string()}),
        None => json!({"k": n.k, "m": n.m.unwrap_or_else(|| default_m(n.k)), "moll_epsilon": n.moll_epsilon}),
    }
}

fn delta_net(n: &NetArgs) -> Result<DeltaNet, Failure> {
    if let Some(p) = &n.moll {
        return Ok(DeltaNet::new(load_mollifier(p)?));
    }
    let eps = rational("moll-epsilon", &n.moll_epsilon)?;
    let base = build_base(n.m.unwrap_or_else(|| default_m(n.k)))?;
    Ok(DeltaNet::new(build_mollifier(n.k, &eps, &base, 1)?))
}

fn fit_config(a: &FitArgs, f: &Fit) -> Json {
    json!({"ladder": a.ladder, "grid": f.grid.to_string(), "trunc": f.trunc.to_string(), "tol": f.tol.to_string()})
}

fn terms_json(fit: &ExpansionFit) -> Vec<Json> {
    fit.terms.iter().map(|t| json!({"q": t.q.to_string(), "coeff": t.coeff.to_string()})).collect()
}

fn window(text: &str, dom: &Domain1D) -> Result<CompactWindow, Failure> {
    let (a, b) = text.split_once(',').ok_or_else(|| Failure::Usage("--window expects lo,hi".into()))?;
    usage("window", CompactWindow::new(parse_rational(a)?, parse_rational(b)?, dom))
}

fn embed(a: &EmbedArgs, json: bool) -> Out {
    let t = usage("dist", parse_distribution(&a.dist))?;
    let dom = usage("domain", Domain1D::parse(&a.domain))?;
    let phi = test_function("pair", &a.pair)?;
    let fit = fit_args(&a.fit)?;
    let win = a.window.as_deref().map(|w| window(w, &dom)).transpose()?;
    let net = delta_net(&a.net)?;
    let rep = embed_distribution(&t, &dom, &net, &fit.ladder)?;
    let result = rep_pair(&rep, &phi, &fit.grid, &fit.trunc, &fit.tol)?;
    let preservation = check_pairing_preservation(&t, &phi, &dom, &net, &fit.ladder)?;
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_path(path).map_err(|e| Failure::Io(e.to_string()))?;
        let io = |e: csv::Error| Failure::Io(e.to_string());
        w.write_record(["epsilon", "pairing", "error"]).map_err(io)?;
        for r in &preservation.rows {
            w.write_record([r.epsilon.to_string(), r.pairing.to_string(), r.error.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Failure::Io(e.to_string()))?;
    }
    let growth = win.as_ref().map(|k| classify(&rep, k, a.alpha_max, fit.trunc.to_integer().try_into().unwrap_or(0))).transpose()?;
    if json {
        let config = json!({
            "command": "embed", "dist": t.to_string(), "domain": dom.to_string(), "pair": a.pair,
            "net": net_config(&a.net), "fit": fit_config(&a.fit, &fit), "window": a.window, "alpha_max": a.alpha_max,
        });
        println!("{}", pretty(&json!({
            "config": config,
            "number": result.number.to_string(),
            "terms": terms_json(&result.fit),
            "residual": result.fit.residual.to_string(),
            "warning": result.warning,
            "exact_pairing": to_json(&preservation.exact),
            "error_order": to_json(&preservation.order),
            "growth": growth.as_ref().map(to_json),
        })));
        return Ok(());
    }
    println!("<Σ({t}), φ> = {}", result.number);
    if let Some(w) = &result.warning {
        println!("warning: {w}");
    }
    println!("<{t}, φ> = {}", value(&preservation.exact));
    println!("error decay order: {}", preservation.order);
    println!("{:>12}  {:>24}  {:>24}", "epsilon", "pairing", "error");
    for r in &preservation.rows {
        println!("{:>12}  {:>24.12e}  {:>24.6e}", r.epsilon.to_string(), r.pairing.to_enclosure().mid_f64(), r.error.to_enclosure().mid_f64());
    }
    if let Some(g) = &growth {
        println!("growth on [{}, {}]:", g.window_lo, g.window_hi);
        for row in &g.rows {
            let note = if row.sampled { " (sampled sups)" } else { "" };
            println!("  ∂^{}: slope {}, {}{note}", row.alpha, row.order, row.class);
        }
    }
    Ok(())
}

fn product(a: &ProductArgs) -> Out {
    let lhs = usage("lhs", parse_distribution(&a.lhs))?;
    let rhs = usage("rhs", parse_distribution(&a.rhs))?;
    let dom = usage("domain", Domain1D::parse(&a.domain))?;
    let phi = test_function("phi", &a.phi)?;
    let fit = fit_args(&a.fit)?;
    let net = delta_net(&a.net)?;
    let r = product_experiment(&lhs, &rhs, &phi, &dom, &net, &fit.ladder, &fit.grid, &fit.trunc, &fit.tol)?;
    let config = json!({
        "command": "product", "lhs": lhs.to_string(), "rhs": rhs.to_string(), "phi": a.phi, "domain": dom.to_string(),
        "net": net_config(&a.net), "fit": fit_config(&a.fit, &fit),
    });
    let body = pretty(&json!({
        "config": config,
        "leading_exponent": r.leading().map(|(q, _)| q.to_string()),
        "terms": terms_json(&r.pairing.fit),
        "residual": r.pairing.fit.residual.to_string(),
        "number": r.pairing.number.to_string(),
        "condition": r.pairing.fit.condition,
        "warning": r.pairing.warning,
    }));
    if let Some(path) = &a.out {
        write(path, &body)?;
    }
    println!("{body}");
    Ok(())
}

fn read_samples(path: &Path) -> Result<Vec<(Rational, Value)>, Failure> {
    let bad = |m: String| Failure::Usage(format!("{}: {m}", path.display()));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    let enclosed = match cols.as_slice() {
        ["epsilon", "value_num", "value_den"] => false,
        ["epsilon", "lo", "hi"] => true,
        _ => return Err(bad(format!("expected header epsilon,value_num,value_den or epsilon,lo,hi, got {}", cols.join(",")))),
    };
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let q = |i: usize| parse_rational(&rec[i]).map_err(|e| bad(format!("row {}: {e}", line + 2)));
        let (eps, a, b) = (q(0)?, q(1)?, q(2)?);
        let v = if enclosed {
            if a > b {
                return Err(bad(format!("row {}: lo above hi", line + 2)));
            }
            Value::Enclosure(Enclosure::new(a, b))
        } else {
            if b.is_zero() {
                return Err(bad(format!("row {}: zero denominator", line + 2)));
            }
            Value::exact(a / b)
        };
        out.push((eps, v));
    }
    Ok(out)
}

fn expand_fit(csv: &Path, grid: &str, trunc: &str, tol: &str, json: bool) -> Out {
    let g = usage("grid", Grid::parse(grid))?;
    let trunc = rational("trunc", trunc)?;
    let tol = rational("tol", tol)?;
    let samples = read_samples(csv)?;
    let fit = fit_expansion(&samples, &g.exponents(samples.len()), &trunc, &tol)?;
    if json {
        let config = json!({"command": "expand fit", "csv": csv.display().to_string(), "grid": g.to_string(), "trunc": trunc.to_string(), "tol": tol.to_string()});
        println!("{}", pretty(&json!({"config": config, "leading_exponent": fit.leading().map(|t| t.q.to_string()), "terms": terms_json(&fit), "fit": to_json(&fit)})));
        return Ok(());
    }
    println!("{}", fit.to_number());
    println!("residual {} (condition {:.3e}, sensitivity {:.3e})", fit.residual, fit.condition, fit.sensitivity);
    Ok(())
}

fn field(a: &FieldArgs, json: bool) -> Out {
    let trunc = rational("trunc", &a.trunc)?;
    match (&a.expr, &a.roots) {
        (Some(e), None) => {
            let v = eval_expr(e, &trunc)?;
            if json {
                println!("{}", pretty(&json!({"config": {"command": "field", "expr": e, "trunc": trunc.to_string()}, "value": v.to_string(), "valuation": v.valuation().to_string()})));
            } else {
                println!("{v}");
            }
            Ok(())
        }
        (None, Some(r)) => {
            let coeffs = r.split(';').map(|c| eval_expr(c, &trunc)).collect::<asympt::Result<Vec<_>>>()?;
            let roots = puiseux_roots(&coeffs, &trunc)?;
            if json {
                let rs: Vec<Json> = roots.iter().map(|r| json!({"value": r.value.to_string(), "exact": r.exact, "note": r.note})).collect();
                println!("{}", pretty(&json!({"config": {"command": "field", "roots": r, "trunc": trunc.to_string()}, "roots": rs})));
            } else {
                for root in &roots {
                    let note = root.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default();
                    println!("{}{note}", root.value);
                }
            }
            Ok(())
        }
        _ => Err(Failure::Usage("field needs --expr or --roots".into())),
    }
}
