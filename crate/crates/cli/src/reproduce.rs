use std::path::PathBuf;

use serde_json::json;
use soscore::convexcert::{
    decide_sos, is_sos_convex, is_sos_matrix, is_valid_hessian, load_fixtures, principal_minors, reference_fixtures,
    verify_separation, ConvexityClass, DecideOptions, Fixtures,
};
use soscore::grambasis::{verify_certificate, Multiplier};
use soscore::polycore::rational::{fmt_rational, int, rat};
use soscore::polycore::{default_names, Rational};

use crate::commands::{class_name, decide_options, fail};
use crate::{exit, Numeric};

struct Step {
    name: &'static str,
    pass: bool,
    detail: Vec<String>,
}

type Outcome = Result<(bool, Vec<String>), String>;

fn motzkin_not_sos(f: &Fixtures, opts: &DecideOptions) -> Outcome {
    let d = decide_sos(&f.motzkin_form, Multiplier::none(), opts).map_err(|e| e.to_string())?;
    let t = d.t().unwrap_or(f64::NAN);
    let pass = d.is_certified_not_sos() && t <= -1e-4;
    Ok((pass, vec![format!("t = {t:.6}, exact separation: {}", d.is_certified_not_sos())]))
}

fn motzkin_times_norm_sos(f: &Fixtures, opts: &DecideOptions) -> Outcome {
    let d = decide_sos(&f.motzkin_form, Multiplier::power(1), opts).map_err(|e| e.to_string())?;
    let mut detail = vec![format!("t = {:.3e}", d.t().unwrap_or(f64::NAN))];
    let pass = match &d.certificate {
        Some(cert) => {
            let rep = verify_certificate(cert);
            detail.push(format!(
                "rational certificate with blocks {:?}: {}",
                cert.blocks.iter().map(|b| b.basis.len()).collect::<Vec<_>>(),
                if rep.pass { "PASS" } else { "FAIL" }
            ));
            rep.pass
        }
        None => {
            detail.push(d.note.clone().unwrap_or_else(|| "no certificate".into()));
            false
        }
    };
    Ok((pass, detail))
}

fn choi(f: &Fixtures, opts: &DecideOptions) -> Outcome {
    let names = default_names(3);
    let mut detail = Vec::new();
    let check = is_valid_hessian(&f.choi).map_err(|e| e.to_string())?;
    let violation = check.find(0, 0, 2);
    if let Some(v) = violation {
        detail.push(format!(
            "not a valid Hessian: dC11/dx3 = {} but dC13/dx1 = {}",
            v.d_ij_k.format_with(&names),
            v.d_ik_j.format_with(&names)
        ));
    }
    let d = is_sos_matrix(&f.choi, 0, false, opts).map_err(|e| e.to_string())?;
    detail.push(format!("y'C(x)y not SOS (exact): {}", d.is_certified_not_sos()));
    let minors = principal_minors(&f.choi, None).map_err(|e| e.to_string())?;
    let mut sos_minors = 0;
    for (idx, m) in &minors {
        let md = decide_sos(m, Multiplier::none(), opts).map_err(|e| e.to_string())?;
        if md.is_certified_sos() {
            sos_minors += 1;
        } else {
            let rows: Vec<usize> = idx.iter().map(|i| i + 1).collect();
            detail.push(format!("minor {rows:?} not certified SOS"));
        }
    }
    detail.push(format!("{sos_minors} of {} principal minors SOS (exact)", minors.len()));
    let pass = !check.is_valid()
        && violation.is_some()
        && d.is_certified_not_sos()
        && minors.len() == 7
        && sos_minors == 7;
    Ok((pass, detail))
}

fn appendix(f: &Fixtures) -> Outcome {
    let rep = verify_certificate(&f.appendix_cert);
    let mut detail = vec![format!(
        "identity {}, blocks {:?}",
        if rep.identity_holds { "exact" } else { "FAILED" },
        f.appendix_cert.blocks.iter().map(|b| b.basis.len()).collect::<Vec<_>>()
    )];
    if let Some(msg) = rep.first_failure() {
        detail.push(msg);
    }
    detail.push(format!("all blocks positive definite: {}", rep.all_positive_definite()));
    Ok((rep.pass && rep.all_positive_definite(), detail))
}

fn separation(f: &Fixtures) -> Outcome {
    let rep = verify_separation(&f.separation);
    let expected = rat(-2237, 250);
    let detail = vec![
        format!(
            "<c, H11> = {} = {:.3}",
            fmt_rational(&rep.pairing),
            soscore::polycore::rational::to_f64(&rep.pairing)
        ),
        format!("moment matrix {}x{}: {:?}", rep.pivots.len(), rep.pivots.len(), rep.moment_verdict),
    ];
    Ok((rep.pass && rep.pairing == expected, detail))
}

fn h11_vector(f: &Fixtures) -> Outcome {
    let d = f
        .p
        .differentiate(0)
        .and_then(|d| d.differentiate(0))
        .map_err(|e| e.to_string())?;
    let vec: Vec<Rational> = f.s.iter().map(|m| d.coeff(m)).collect();
    let shown: Vec<String> = vec.iter().map(fmt_rational).collect();
    let pass = d == f.h11 && vec == f.h11_vector;
    Ok((pass, vec![format!("d^2p/dx1^2 on S: [{}]", shown.join(", "))]))
}

fn convex_not_sos_convex(f: &Fixtures, opts: &DecideOptions) -> Outcome {
    let rep = is_sos_convex(&f.p, opts).map_err(|e| e.to_string())?;
    let class = rep.class();
    let sep_ok = rep
        .sos_convex
        .separation
        .as_ref()
        .is_some_and(|s| verify_separation(s).proves_not_sos());
    let detail = vec![
        format!("class: {}, convexity multiplier r = {:?}", class_name(class), rep.convex_r()),
        format!("negative witness verifies exactly: {sep_ok}"),
    ];
    Ok((class == ConvexityClass::ConvexNotSosConvex && rep.convex_r() == Some(1) && sep_ok, detail))
}

fn p_sos(f: &Fixtures, opts: &DecideOptions) -> Outcome {
    let d = decide_sos(&f.p, Multiplier::none(), opts).map_err(|e| e.to_string())?;
    Ok((
        d.is_certified_sos(),
        vec![format!("t = {:.6}, exact certificate: {}", d.t().unwrap_or(f64::NAN), d.is_certified_sos())],
    ))
}

fn p_positive(f: &Fixtures) -> Outcome {
    let mut count = 0;
    let mut min: Option<Rational> = None;
    for a in -2..=2 {
        for b in -2..=2 {
            for c in -2..=2 {
                if (a, b, c) == (0, 0, 0) {
                    continue;
                }
                let v = f.p.evaluate(&[int(a), int(b), int(c)]).map_err(|e| e.to_string())?;
                if min.as_ref().is_none_or(|m| &v < m) {
                    min = Some(v);
                }
                count += 1;
            }
        }
    }
    let min = min.expect("grid is nonempty");
    let pass = min > int(0);
    Ok((pass, vec![format!("{count} integer points in [-2, 2]^3, smallest value {}", fmt_rational(&min))]))
}

fn dehomogenized(f: &Fixtures, opts: &DecideOptions, var: usize, want: ConvexityClass) -> Outcome {
    let q = f.p.dehomogenize(var, &int(1)).map_err(|e| e.to_string())?;
    let rep = is_sos_convex(&q, opts).map_err(|e| e.to_string())?;
    let class = rep.class();
    Ok((
        class == want,
        vec![format!("class: {}, convexity multiplier r = {:?}", class_name(class), rep.convex_r())],
    ))
}

pub fn run(fixtures: Option<PathBuf>, numeric: &Numeric, json: Option<PathBuf>) -> u8 {
    let f = match &fixtures {
        Some(dir) => match load_fixtures(dir) {
            Ok(f) => f,
            Err(e) => return fail(exit::MISSING_FIXTURE, e.to_string()),
        },
        None => reference_fixtures(),
    };
    let opts = decide_options(numeric, 3);
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let checks: Vec<(&'static str, Check)> = vec![
        ("Motzkin form is not SOS", Box::new(|| motzkin_not_sos(&f, &opts))),
        ("Motzkin form times (x1^2 + x2^2 + x3^2) is SOS", Box::new(|| motzkin_times_norm_sos(&f, &opts))),
        (
            "Choi matrix: not a Hessian, not an sos-matrix, all 7 principal minors SOS",
            Box::new(|| choi(&f, &opts)),
        ),
        ("Appendix certificate verifies with positive definite blocks", Box::new(|| appendix(&f))),
        ("separating functional: pairing -8.948, moment matrix positive definite", Box::new(|| separation(&f))),
        ("H11 coefficient vector matches", Box::new(|| h11_vector(&f))),
        ("p is convex (r = 1) and not sos-convex", Box::new(|| convex_not_sos_convex(&f, &opts))),
        ("p is SOS", Box::new(|| p_sos(&f, &opts))),
        ("p is positive at sampled points", Box::new(|| p_positive(&f))),
        (
            "p(x1, x2, 1) is convex and not sos-convex",
            Box::new(|| dehomogenized(&f, &opts, 2, ConvexityClass::ConvexNotSosConvex)),
        ),
        (
            "p(1, x2, x3) is sos-convex",
            Box::new(|| dehomogenized(&f, &opts, 0, ConvexityClass::SosConvex)),
        ),
    ];
    let total = checks.len();
    let mut steps = Vec::with_capacity(total);
    for (k, (name, check)) in checks.iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(v) => v,
            Err(e) => (false, vec![format!("error: {e}")]),
        };
        println!("[{:>2}/{total}] {} {name}", k + 1, if pass { "PASS" } else { "FAIL" });
        for d in &detail {
            println!("        {d}");
        }
        steps.push(Step { name, pass, detail });
    }
    let failed: Vec<&str> = steps.iter().filter(|s| !s.pass).map(|s| s.name).collect();
    println!("{}/{total} checks passed", total - failed.len());
    let code = if failed.is_empty() { exit::OK } else { exit::NEGATIVE };
    for name in &failed {
        eprintln!("failed step: {name}");
    }
    let report = json!({
        "command": "reproduce-paper",
        "steps": steps.iter().map(|s| json!({"name": s.name, "pass": s.pass, "detail": s.detail})).collect::<Vec<_>>(),
        "exit_code": code,
    });
    match json {
        Some(path) => match std::fs::write(&path, serde_json::to_string_pretty(&report).expect("serializes") + "\n") {
            Ok(()) => code,
            Err(e) => fail(exit::INPUT, format!("{}: {e}", path.display())),
        },
        None => code,
    }
}
