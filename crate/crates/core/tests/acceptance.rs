//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};

use asympt::delta::{audit_delta, build_cutoff, DeltaNet};
use asympt::dist::{parse_distribution, poly_density, Dist};
use asympt::domain::{CompactWindow, Domain1D};
use asympt::embed::{check_pairing_preservation, check_smooth_consistency, classify, embed_distribution, parse_test_function, product_experiment, Growth};
use asympt::exact::Polynomial;
use asympt::expansion::{default_ladder, fit_expansion, EpsLadder, Grid};
use asympt::field::{eval_poly, puiseux_roots};
use asympt::mollifier::{build_base, build_mollifier, default_m, exponent_identities_hold, exponent_report, find_epsilon, predicted_exponents, Mollifier};
use asympt::scalar::{exact_log_ratio, factorial, int, rat, rational_to_f64, rpow};
use asympt::{AsymptoticNumber, Error, PiecewisePoly, Rational};
use num_complex::Complex;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn net(k: usize, eps: Rational, m: u32) -> std::result::Result<DeltaNet, String> {
    let base = build_base(m).map_err(e)?;
    Ok(DeltaNet::new(build_mollifier(k, &eps, &base, 1).map_err(e)?))
}

fn ladder() -> Vec<Rational> {
    default_ladder().points()
}

fn moment_exactness() -> Check {
    for k in 1..=8 {
        let base = build_base(default_m(k)).map_err(e)?;
        let phi = build_mollifier(k, &rat(1, 16), &base, 1).map_err(e)?;
        ensure(phi.moment_1d(0).is_one(), format!("k={k}: mass {}", phi.moment_1d(0)))?;
        for i in 1..=k {
            ensure(phi.moment_1d(i).is_zero(), format!("k={k}: moment {i} = {}", phi.moment_1d(i)))?;
        }
    }
    Ok("k=1..8, moments 1..k are exact zeros".into())
}

fn l1_infimum() -> Check {
    let floor = Rational::one() - rpow(&int(2), -40);
    let mut found = Vec::new();
    for k in 1..=5 {
        let s = find_epsilon(k, &rat(1, 20), &build_base(default_m(k)).map_err(e)?).map_err(e)?;
        ensure(s.l1.lo >= floor && s.l1.hi <= rat(105, 100), format!("k={k}: L1 in {}", s.l1))?;
        found.push(format!("k={k}:ε={}", s.epsilon));
    }
    for eps in [rat(1, 10), rat(1, 2)] {
        let phi = build_mollifier(1, &eps, &build_base(4).map_err(e)?, 1).map_err(e)?;
        let l1 = phi.l1_norm(&rpow(&int(2), -40)).map_err(e)?;
        let closed = (Rational::one() + &eps) / (Rational::one() - &eps);
        ensure(l1.hi <= closed, format!("k=1, ε={eps}: L1 {l1} above (1+ε)/(1-ε) = {closed}"))?;
    }
    Ok(found.join(" "))
}

fn exponent_law() -> Check {
    let lad = ladder();
    for k in 1..=6 {
        ensure(exponent_identities_hold(k), format!("k={k}: identities fail"))?;
        let rep = exponent_report(k, &lad).map_err(e)?;
        for (j, (m, p)) in rep.measured.iter().zip(&rep.predicted).enumerate() {
            ensure((m - *p as f64).abs() <= 0.25, format!("k={k}, j={j}: measured {m} vs {p}"))?;
        }
    }
    ensure(predicted_exponents(2) == (vec![7, 4, 2], 4), "k=2 cross-check")?;
    Ok("k=1..6 identities exact, valuations within 1/4".into())
}

fn delta_audit() -> Check {
    let k = 4;
    let m = default_m(k);
    let search = find_epsilon(k, &rat(1, 4), &build_base(m).map_err(e)?).map_err(e)?;
    let n = DeltaNet::new(search.mollifier);
    let (e4, e16) = (rpow(&int(2), -4), rpow(&int(2), -16));
    let a = audit_delta(&n, &e4, 2).map_err(e)?;
    let b = audit_delta(&n, &e16, 2).map_err(e)?;
    for r in [&a, &b] {
        ensure(r.support_in_ball && r.mass.is_one() && r.moments_vanish, format!("(i)-(iii) at ε={}", r.epsilon))?;
        ensure(r.excess_ok, format!("(iv) excess {} above 1/4", r.excess))?;
    }
    ensure(a.excess == b.excess && a.excess == a.base_excess, "(iv) excess depends on ε")?;
    let closed = exact_log_ratio(&e16, &e4).ok_or("no exact log ratio")?;
    ensure(closed == int(4), format!("closed-form ratio {closed}"))?;
    for (ra, rb) in a.derivatives.iter().zip(&b.derivatives) {
        ensure(ra.rescaled == ra.base_sup && rb.rescaled == rb.base_sup, "rescaled sup is not exactly sup|∂θ|")?;
        let ratio = rational_to_f64(&ra.normalized.mid()) / rational_to_f64(&rb.normalized.mid());
        ensure((ratio - 4.0).abs() / 4.0 < 0.01, format!("|α|={:?}: ratio {ratio}", ra.alpha))?;
    }
    Ok(format!("θ at ε={}, excess <= {:.6}, (v) ratio 4", search.epsilon, rational_to_f64(&a.excess.hi)))
}

fn cutoff_sandwich() -> Check {
    let n = net(2, rat(1, 16), 5)?;
    let dom = Domain1D::parse("(0,10)").map_err(e)?;
    let eps = rat(1, 8);
    let cut = build_cutoff(&dom, &eps, &n).map_err(e)?;
    let (p_lo, p_hi) = (rat(3, 8), (int(10) - rat(3, 8)).min(int(8) - rat(1, 4)));
    let in_plateau = |x: &Rational| p_lo <= *x && *x <= p_hi;
    let in_zero = |x: &Rational| x.is_positive() && *x <= eps;
    let mut pts: Vec<Rational> = cut.shape.breakpoints().iter().filter(|x| in_plateau(x) || in_zero(x)).cloned().collect();
    pts.extend([p_lo.clone(), p_hi.clone(), eps.clone()]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..100 {
        let t = rat(rng.gen_range(0..=1000), 1000);
        pts.push(if i % 2 == 0 { &p_lo + (&p_hi - &p_lo) * t } else { &eps * t + rat(1, 100_000) });
    }
    for x in &pts {
        let v = cut.eval(x);
        if in_plateau(x) {
            ensure(v.is_one(), format!("Π({x}) = {v}, expected 1"))?;
        } else {
            ensure(v.is_zero(), format!("Π({x}) = {v}, expected 0"))?;
        }
    }
    Ok(format!("{} points exact", pts.len()))
}

/// Log-log slope slack: the error is `aε^{k+1}(1 + O(ε))`, so a finite-ladder fit sits just below `k+1`.
const SLOPE_SLACK: f64 = 1e-2;

fn leading_error_exponent(rows: &[asympt::embed::PreservationRow]) -> Option<Rational> {
    let samples: Vec<(Rational, asympt::exact::Value)> = rows.iter().map(|r| (r.epsilon.clone(), r.error.clone())).collect();
    if samples.iter().all(|(_, v)| v.as_exact().is_some_and(|x| x.is_zero())) {
        return Some(int(1_000));
    }
    let grid = Grid::Integers.exponents(samples.len());
    let fit = match fit_expansion(&samples, &grid, &int(12), &rat(1, 1_000_000)) {
        Ok(f) => f,
        Err(Error::NoValidExpansion { fit, .. }) => *fit,
        Err(_) => return None,
    };
    fit.leading().map(|t| t.q.clone())
}

fn pairing_order() -> Check {
    let lad = ladder();
    let whole = Domain1D::whole_line();
    let phi = parse_test_function("bump@1/3:1").map_err(e)?;
    let atoms = [("δ", Dist::delta(int(0))), ("δ′", Dist::DeltaDeriv { order: 1, at: int(0) }), ("H", Dist::heaviside(int(0)))];
    let mut notes = Vec::new();
    for k in 1..=3 {
        let n = net(k, rat(1, 16), default_m(k))?;
        let mu = n.base.moment_1d(k + 1);
        // degree-k polynomial window on [-1, 1]
        let p = Polynomial::new((0..=k as i64).map(|i| rat(i + 2, i + 1)).collect());
        let window = poly_density(p.clone(), Some(int(-1)), Some(int(1))).map_err(e)?;
        let low = Polynomial::new(p.coeffs()[..k].to_vec());
        let low_window = poly_density(low, Some(int(-1)), Some(int(1))).map_err(e)?;
        for (name, t) in &atoms {
            let rep = check_pairing_preservation(t, &phi, &whole, &n, &lad).map_err(e)?;
            let lead = leading_error_exponent(&rep.rows).ok_or(format!("{name}, k={k}: no leading error term"))?;
            let fitted_ok = rep.order.slope.map_or(true, |s| s >= k as f64 + 1.0 - SLOPE_SLACK);
            ensure(lead >= int(k as i64 + 1) && fitted_ok && rep.order.residual < 0.1, format!("{name}, k={k}: leading ε^{lead}, order {}", rep.order))?;
            let poly = check_pairing_preservation(t, &window, &whole, &n, &lad).map_err(e)?;
            if *name == "H" {
                // e(ε) = -(-1)^{k+1} p^{(k)}(0) μ_{k+1} ε^{k+1} / (k+1)!, zero only when μ_{k+1} = 0
                let pk = p.nth_derivative(k).eval(&Rational::zero());
                let sign = if k % 2 == 0 { int(1) } else { int(-1) };
                for row in &poly.rows {
                    let want = sign.clone() * &pk * &mu * rpow(&row.epsilon, k as i64 + 1) / factorial(k as u32 + 1);
                    ensure(row.error.as_exact() == Some(&want), format!("H, k={k}, ε={}: error {} vs {want}", row.epsilon, row.error))?;
                }
                let low = check_pairing_preservation(t, &low_window, &whole, &n, &lad).map_err(e)?;
                ensure(low.all_zero(), format!("H, k={k}: degree k-1 window not exact"))?;
                if !poly.all_zero() {
                    notes.push(format!("H,k={k}: degree-k error is the ε^{} closed form", k + 1));
                }
            } else {
                ensure(poly.all_zero(), format!("{name}, k={k}: polynomial window error not zero"))?;
            }
        }
    }
    Ok(format!("leading error exponent >= k+1; polynomial windows exact; {}", notes.join(", ")))
}

fn smooth_consistency() -> Check {
    let lad = ladder();
    let whole = Domain1D::whole_line();
    let window = CompactWindow::new(int(-1), int(1), &whole).map_err(e)?;
    let x2 = PiecewisePoly::global(Polynomial::monomial(int(1), 2));
    for k in 2..=3 {
        let n = net(k, rat(1, 16), default_m(k))?;
        let r = check_smooth_consistency(&x2, &n, &lad, &window).map_err(e)?;
        ensure(r.exact_zero(), format!("x², k={k}: defect not zero"))?;
    }
    let n1 = net(1, rat(1, 16), default_m(1))?;
    let mu2 = n1.base.moment_1d(2);
    let r = check_smooth_consistency(&x2, &n1, &lad, &window).map_err(e)?;
    for row in &r.rows {
        let want = (&row.epsilon * &row.epsilon * &mu2).abs();
        ensure(row.defect.is_point() && row.defect.lo == want, format!("x², k=1, ε={}: {} vs {want}", row.epsilon, row.defect))?;
    }
    let x5 = PiecewisePoly::global(Polynomial::monomial(int(1), 5));
    let n3 = net(3, rat(1, 16), default_m(3))?;
    let r = check_smooth_consistency(&x5, &n3, &lad, &window).map_err(e)?;
    ensure(r.order.at_least(4.0) && r.bound_holds(), format!("x⁵, k=3: order {}, bound {}", r.order, r.bound_holds()))?;
    Ok(format!("x⁵ defect order {}", r.order))
}

fn random_atom(rng: &mut ChaCha8Rng) -> Dist {
    let a = rat(rng.gen_range(-4..=4), 4);
    match rng.gen_range(0..4) {
        0 => Dist::DeltaDeriv { order: rng.gen_range(0..3), at: a },
        1 => Dist::heaviside(a),
        2 => Dist::PrincipalValue,
        _ => {
            let p = Polynomial::new((0..3).map(|_| rat(rng.gen_range(-5..=5), rng.gen_range(1..=4))).collect());
            Dist::Density(poly_density(p, Some(a.clone()), Some(a + rat(rng.gen_range(1..=8), 4))).unwrap())
        }
    }
}

fn linearity_and_derivatives() -> Check {
    let lad: Vec<Rational> = EpsLadder::new(rat(1, 8), rat(1, 2), 4).map_err(e)?.points();
    let whole = Domain1D::whole_line();
    let n = net(2, rat(1, 16), 6)?;
    let emb = |t: &Dist| embed_distribution(t, &whole, &n, &lad).map_err(e);
    let t = parse_distribution("2*delta + 3*D(heaviside)").map_err(e)?;
    let lhs = emb(&t)?;
    let rhs = emb(&Dist::delta(int(0)))?.scale(&int(2)).add(&emb(&parse_distribution("D(heaviside)").map_err(e)?)?.scale(&int(3))).map_err(e)?;
    ensure(lhs.sub(&rhs).map_err(e)?.is_zero(), "Σ(2δ + 3H′) differs from 2Σ(δ) + 3Σ(H′)")?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..20 {
        let terms = rng.gen_range(1..=3);
        let mut t = random_atom(&mut rng).scale(rat(rng.gen_range(-6..=6), rng.gen_range(1..=3)));
        for _ in 1..terms {
            t = t.plus(random_atom(&mut rng).scale(rat(rng.gen_range(-6..=6), rng.gen_range(1..=3))));
        }
        let d_of_sigma = emb(&t)?.derivative(1).map_err(e)?;
        let sigma_of_d = emb(&t.clone().derivative(1))?;
        ensure(d_of_sigma.sub(&sigma_of_d).map_err(e)?.is_zero(), format!("combination {i}: Σ(∂T) ≠ ∂Σ(T) for {t}"))?;
    }
    Ok("linearity exact; 20 random combinations commute with ∂".into())
}

/// `∫θ²` from the expansion `θ = Σ c_j ψ(x/ε^j)`, integrating each product on the smaller support.
fn theta_square_integral(theta: &Mollifier) -> Rational {
    let base = Polynomial::new(vec![int(1), int(0), int(-1)]).pow(theta.m() as usize).scale(&theta.base.norm);
    let mut total = Rational::zero();
    for (i, ci) in theta.coeffs.iter().enumerate() {
        for (j, cj) in theta.coeffs.iter().enumerate() {
            let (si, sj) = (rpow(&theta.epsilon, i as i64), rpow(&theta.epsilon, j as i64));
            let r = (&si).min(&sj).clone();
            let pi = base.compose_affine(&si.recip(), &Rational::zero());
            let pj = base.compose_affine(&sj.recip(), &Rational::zero());
            let anti = (&pi * &pj).antiderivative();
            total += ci * cj * (anti.eval(&r) - anti.eval(&-r.clone()));
        }
    }
    total
}

fn products() -> Check {
    let lad = ladder();
    let whole = Domain1D::whole_line();
    let phi = parse_test_function("bump@0:1").map_err(e)?;
    let phi0 = phi.eval(&Rational::zero());
    let tol = rat(1, 1_000_000);
    let mut halves = Vec::new();
    for m in 3..=5 {
        let n = net(2, rat(1, 16), m)?;
        let dh = product_experiment(&Dist::delta(int(0)), &Dist::heaviside(int(0)), &phi, &whole, &n, &lad, &Grid::Integers, &int(8), &tol).map_err(e)?;
        let c0 = dh.pairing.fit.coeff(&int(0));
        let gap = rational_to_f64(&(&c0 - &phi0 / int(2)).abs());
        ensure(dh.pairing.warning.is_none() && gap <= 1e-6 && dh.pairing.fit.residual <= tol, format!("m={m}: δ·H constant {c0}"))?;
        halves.push(c0 == &phi0 / int(2));
        let dd = product_experiment(&Dist::delta(int(0)), &Dist::delta(int(0)), &phi, &whole, &n, &lad, &Grid::Integers, &int(8), &tol).map_err(e)?;
        let (q, c) = dd.leading().ok_or("δ·δ has no terms")?;
        let want = theta_square_integral(&n.base) * &phi0;
        ensure(q == int(-1) && c == want, format!("m={m}: δ·δ leading {c} ε^{q}, expected {want} ε^-1"))?;
    }
    Ok(format!("δ·H constant φ(0)/2 (exact: {halves:?}); δ·δ leading (∫θ²)φ(0)ε^-1 exact"))
}

type S = AsymptoticNumber;

fn random_series(rng: &mut ChaCha8Rng, trunc: &Rational) -> S {
    let n = rng.gen_range(1..=4);
    let terms: Vec<(Rational, Complex<Rational>)> = (0..n)
        .map(|_| {
            let q = rat(rng.gen_range(-4..=8), rng.gen_range(1..=3));
            let c = Complex::new(rat(rng.gen_range(-9..=9), rng.gen_range(1..=5)), rat(rng.gen_range(-3..=3), rng.gen_range(1..=5)));
            (q, c)
        })
        .collect();
    S::new(terms, trunc.clone())
}

fn field_axioms() -> Check {
    let trunc = int(8);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let zero_diff = |a: &S, b: &S| (a - b).is_zero();
    for i in 0..200 {
        let (a, b, c) = (random_series(&mut rng, &trunc), random_series(&mut rng, &trunc), random_series(&mut rng, &trunc));
        let ok = zero_diff(&(&(&a + &b) + &c), &(&a + &(&b + &c)))
            && zero_diff(&(&a + &b), &(&b + &a))
            && zero_diff(&(&(&a * &b) * &c), &(&a * &(&b * &c)))
            && zero_diff(&(&a * &b), &(&b * &a))
            && zero_diff(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)))
            && (&a + &(-&a)).is_zero();
        ensure(ok, format!("check {i}: ring axiom failed"))?;
        if !a.is_zero() {
            let inv = a.inv().map_err(e)?;
            ensure(zero_diff(&(&a * &inv), &S::one(trunc.clone())), format!("check {i}: a·a⁻¹ ≠ 1"))?;
        }
    }
    let one = Complex::new(Rational::one(), Rational::zero());
    let eps = S::eps(trunc.clone());
    for (name, c0) in [("z²-ε", -&eps), ("z²-(1+ε)", -(&S::one(trunc.clone()) + &eps))] {
        let coeffs = vec![c0, S::zero(trunc.clone()), S::constant(one.clone(), trunc.clone())];
        let roots = puiseux_roots(&coeffs, &trunc).map_err(e)?;
        ensure(roots.len() == 2, format!("{name}: {} roots", roots.len()))?;
        for r in roots {
            let v = eval_poly(&coeffs, &r.value);
            let below = v.terms().keys().any(|q| *q < trunc);
            ensure(r.exact && !below && *v.trunc() >= trunc, format!("{name}: P(root) = {v}"))?;
        }
    }
    Ok("200 random checks, puiseux back-substitution valuation >= 8".into())
}

fn moderateness_slopes() -> Check {
    let lad = ladder();
    let whole = Domain1D::whole_line();
    let window = CompactWindow::new(int(-1), int(1), &whole).map_err(e)?;
    let n = net(2, rat(1, 16), 6)?;
    let r = embed_distribution(&Dist::delta(int(0)), &whole, &n, &lad).map_err(e)?;
    let rep = classify(&r, &window, 2, 4).map_err(e)?;
    for row in &rep.rows {
        let want = int(-(1 + row.alpha as i64));
        ensure(row.order.exact_slope == Some(want.clone()) && row.order.residual == 0.0, format!("Σ(δ), n={}: slope {}", row.alpha, row.order))?;
        ensure(matches!(row.class, Growth::Moderate { .. }), "Σ(δ) not moderate")?;
    }
    let h = embed_distribution(&Dist::heaviside(int(0)), &whole, &n, &lad).map_err(e)?;
    let rep = classify(&h, &window, 0, 4).map_err(e)?;
    ensure(rep.rows[0].order.exact_slope == Some(int(0)), format!("Σ(H): slope {}", rep.rows[0].order))?;
    Ok("Σ(δ) slopes -1, -2, -3 exact; Σ(H) slope 0".into())
}

fn expansion_exactness() -> Check {
    let lad = ladder();
    let g = |e: &Rational| int(3) * rpow(e, -2) + int(2) + int(5) * rpow(e, 3);
    let samples: Vec<(Rational, asympt::exact::Value)> = lad.iter().map(|x| (x.clone(), asympt::exact::Value::exact(g(x)))).collect();
    let grid = Grid::Integers.exponents(samples.len());
    let fit = fit_expansion(&samples, &grid, &int(8), &rat(1, 1_000_000)).map_err(e)?;
    ensure(fit.residual.is_zero(), format!("residual {}", fit.residual))?;
    let want = [(int(-2), int(3)), (int(0), int(2)), (int(3), int(5))];
    ensure(fit.terms.len() == 3 && want.iter().all(|(q, c)| fit.coeff(q) == *c), format!("terms {:?}", fit.terms))?;
    let four = EpsLadder::parse("4^-1..4^-10").map_err(e)?.points();
    let root: Vec<(Rational, asympt::exact::Value)> = four.iter().map(|x| (x.clone(), asympt::exact::Value::exact(asympt::scalar::rational_root(x, 2).unwrap()))).collect();
    match fit_expansion(&root, &Grid::Integers.exponents(root.len()), &int(8), &rat(1, 1_000_000)) {
        Err(Error::NoValidExpansion { .. }) => Ok("3ε^-2 + 2 + 5ε^3 exact; ε^(1/2) rejected on the integer grid".into()),
        other => Err(format!("ε^(1/2) was not rejected: {other:?}")),
    }
}

fn main() {
    let criteria: Vec<(&str, fn() -> Check)> = vec![
        ("moment exactness", moment_exactness),
        ("L1 infimum approach", l1_infimum),
        ("exponent law", exponent_law),
        ("delta-net audit", delta_audit),
        ("cut-off sandwich", cutoff_sandwich),
        ("pairing preservation order", pairing_order),
        ("smooth consistency and diagram", smooth_consistency),
        ("linearity and derivative commutation", linearity_and_derivatives),
        ("products", products),
        ("field axioms and closure witness", field_axioms),
        ("moderateness slopes", moderateness_slopes),
        ("expansion extractor exactness", expansion_exactness),
    ];
    println!();
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let started = std::time::Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                println!("FAIL {:>2} {name} ({secs:.1}s): {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
