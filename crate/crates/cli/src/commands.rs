use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use soscore::convexcert::{
    decide_sos, is_sos_convex, verify_separation, ConvexityClass, DecideOptions, SeparationCertificate, SosDecision,
    SosVerdict,
};
use soscore::discover::{full_blocks, search_counterexample, Certification, SearchConfig, SearchStatus};
use soscore::grambasis::{verify_certificate, GramCertificate, Multiplier, RationalizeOptions};
use soscore::polycore::{default_names, read_polynomial, Polynomial};
use soscore::sosprog::{project_onto_sos, SdpStatus, SosOptions};

use crate::{exit, Numeric};

pub fn fail(code: u8, msg: impl AsRef<str>) -> u8 {
    eprintln!("error: {}", msg.as_ref());
    code
}

fn read_input(path: &Path) -> Result<(Polynomial, Vec<String>), u8> {
    let text = fs::read_to_string(path).map_err(|e| fail(exit::INPUT, format!("{}: {e}", path.display())))?;
    read_polynomial(&text).map_err(|e| fail(exit::INPUT, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), u8> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| fail(exit::INPUT, format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| fail(exit::INPUT, format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), u8> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    write_file(path, &(text + "\n"))
}

fn sidecar(path: Option<PathBuf>, value: Value) -> Result<(), u8> {
    match path {
        Some(p) => write_json(&p, &value),
        None => Ok(()),
    }
}

/// `vars:` header plus the polynomial, readable by `read_polynomial`.
pub fn polynomial_text(p: &Polynomial, names: &[String]) -> String {
    format!("vars: {}\n{}\n", names.join(" "), p.format_with(names))
}

pub fn decide_options(numeric: &Numeric, r_cap: u32) -> DecideOptions {
    let rationalize = RationalizeOptions {
        denominator_bound: numeric.denom_bound,
        max_denominator: RationalizeOptions::default().max_denominator.max(numeric.denom_bound),
        ..RationalizeOptions::default()
    };
    DecideOptions {
        sos: SosOptions::with_tol(numeric.tol),
        rationalize,
        r_cap,
        ..DecideOptions::default()
    }
}

fn with_suffix(input: &Path, suffix: &str) -> PathBuf {
    let mut name = input.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    input.with_file_name(name)
}

fn verdict_name(d: &SosDecision) -> &'static str {
    match (d.verdict, d.exact) {
        (SosVerdict::Sos, true) => "sos",
        (SosVerdict::NotSos, true) => "not_sos",
        _ => "inconclusive",
    }
}

fn solver_failed(d: &SosDecision) -> bool {
    d.numeric.as_ref().is_some_and(|r| r.is_sos.is_none())
}

fn describe(d: &SosDecision) -> String {
    let t = d.t().map(|t| format!(", t = {t:.3e}")).unwrap_or_default();
    let what = match (d.verdict, d.exact) {
        (SosVerdict::Sos, true) => "SOS (exact certificate)",
        (SosVerdict::Sos, false) => "SOS numerically, no exact certificate",
        (SosVerdict::NotSos, true) => "not SOS (exact)",
        (SosVerdict::NotSos, false) => "not SOS numerically, no exact separation",
        (SosVerdict::Inconclusive, _) => "inconclusive",
    };
    match &d.note {
        Some(n) => format!("{what}{t} [{n}]"),
        None => format!("{what}{t}"),
    }
}

pub fn check_sos(input: &Path, numeric: &Numeric, r: u32, out: Option<PathBuf>, json: Option<PathBuf>) -> u8 {
    let (p, names) = match read_input(input) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let multiplier = match r {
        0 => Multiplier::none(),
        _ if p.is_form() => Multiplier::power(r),
        _ => Multiplier {
            r,
            vars: None,
            affine: true,
        },
    };
    let d = match decide_sos(&p, multiplier, &decide_options(numeric, 3)) {
        Ok(d) => d,
        Err(e) => return fail(exit::SOLVER, e.to_string()),
    };
    println!("polynomial: {}", p.format_with(&names));
    if r > 0 {
        println!("multiplier: {}", multiplier.polynomial(p.nvars()).format_with(&names));
    }
    println!("verdict: {}", describe(&d));
    let out = out.unwrap_or_else(|| with_suffix(input, ".cert.json"));
    let mut written = None;
    if let Some(cert) = d.certificate.as_ref().filter(|_| d.exact) {
        if let Err(code) = write_json(&out, cert) {
            return code;
        }
        written = Some(out);
    } else if let Some(sep) = d.separation.as_ref().filter(|_| d.exact) {
        if let Err(code) = write_json(&out, sep) {
            return code;
        }
        print!("{}", verify_separation(sep));
        written = Some(out);
    }
    if let Some(path) = &written {
        println!("certificate written to {}", path.display());
    }
    let code = match verdict_name(&d) {
        "sos" => exit::OK,
        "not_sos" => exit::NEGATIVE,
        _ if solver_failed(&d) => exit::SOLVER,
        _ => exit::INCONCLUSIVE,
    };
    let report = json!({
        "command": "check-sos",
        "verdict": verdict_name(&d),
        "t": d.t(),
        "multiplier_r": r,
        "certificate": written.map(|p| p.display().to_string()),
        "note": d.note,
        "exit_code": code,
    });
    sidecar(json, report).err().unwrap_or(code)
}

pub fn check_sos_convex(input: &Path, numeric: &Numeric, r: u32, out: Option<PathBuf>, json: Option<PathBuf>) -> u8 {
    let (p, names) = match read_input(input) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let rep = match is_sos_convex(&p, &decide_options(numeric, r)) {
        Ok(rep) => rep,
        Err(e) => return fail(exit::SOLVER, e.to_string()),
    };
    println!("polynomial: {}", p.format_with(&names));
    println!("hessian:\n{}", rep.hessian.format_with(&names).trim_end());
    println!("sos-convexity (r = 0): {}", describe(&rep.sos_convex));
    for d in &rep.convexity {
        println!("convexity (r = {}): {}", d.multiplier.r, describe(d));
    }
    let class = rep.class();
    println!("class: {}", class_name(class));
    let stem = match &out {
        Some(dir) => dir.join(input.file_name().unwrap_or_default()),
        None => input.to_path_buf(),
    };
    let mut files = Vec::new();
    if let Some(cert) = rep.convexity_certificate() {
        let path = with_suffix(&stem, ".convexity.cert.json");
        if let Err(code) = write_json(&path, cert) {
            return code;
        }
        files.push(path);
    }
    if let Some(sep) = rep.sos_convex.separation.as_ref().filter(|_| rep.sos_convex.is_certified_not_sos()) {
        let path = with_suffix(&stem, ".separation.json");
        if let Err(code) = write_json(&path, sep) {
            return code;
        }
        files.push(path);
    }
    for f in &files {
        println!("certificate written to {}", f.display());
    }
    let code = match class {
        ConvexityClass::SosConvex => exit::OK,
        ConvexityClass::ConvexNotSosConvex => exit::NEGATIVE,
        ConvexityClass::NotSosConvexUnknownConvexity => exit::NOT_SOS_CONVEX_UNKNOWN,
        ConvexityClass::Inconclusive if solver_failed(&rep.sos_convex) => exit::SOLVER,
        ConvexityClass::Inconclusive => exit::INCONCLUSIVE,
    };
    let report = json!({
        "command": "check-sos-convex",
        "class": class_name(class),
        "sos_convex_t": rep.sos_convex.t(),
        "convex_r": rep.convex_r(),
        "certificates": files.iter().map(|f| f.display().to_string()).collect::<Vec<_>>(),
        "exit_code": code,
    });
    sidecar(json, report).err().unwrap_or(code)
}

pub fn class_name(c: ConvexityClass) -> &'static str {
    match c {
        ConvexityClass::SosConvex => "sos-convex",
        ConvexityClass::ConvexNotSosConvex => "convex-not-sos-convex",
        ConvexityClass::NotSosConvexUnknownConvexity => "not-sos-convex-convexity-unknown",
        ConvexityClass::Inconclusive => "inconclusive",
    }
}

pub fn verify(path: &Path, json: Option<PathBuf>) -> u8 {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(exit::INPUT, format!("{}: {e}", path.display())),
    };
    let value: Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => return fail(exit::INPUT, format!("{}: {e}", path.display())),
    };
    let (pass, kind, detail) = if value.get("blocks").is_some() {
        let cert: GramCertificate = match serde_json::from_value(value) {
            Ok(c) => c,
            Err(e) => return fail(exit::INPUT, format!("{}: {e}", path.display())),
        };
        let names = default_names(cert.target.nvars());
        println!("target: {}", cert.target.format_with(&names));
        if cert.multiplier.r > 0 {
            let m = cert.multiplier.polynomial(cert.target.nvars());
            println!("multiplier: {}", m.format_with(&names));
        }
        let rep = verify_certificate(&cert);
        print!("{rep}");
        if let Some(f) = rep.first_failure() {
            println!("first discrepancy: {f}");
        }
        (rep.pass, "gram", rep.first_failure())
    } else if value.get("c").is_some() {
        let cert: SeparationCertificate = match serde_json::from_value(value) {
            Ok(c) => c,
            Err(e) => return fail(exit::INPUT, format!("{}: {e}", path.display())),
        };
        let names = default_names(cert.target.nvars());
        println!("target: {}", cert.target.format_with(&names));
        let rep = verify_separation(&cert);
        print!("{rep}");
        let detail = (!rep.pass).then(|| {
            if !rep.pairing_negative {
                "pairing is not negative".to_string()
            } else {
                "moment matrix is not PSD".to_string()
            }
        });
        (rep.pass, "separation", detail)
    } else {
        return fail(exit::INPUT, "not a Gram or separation certificate");
    };
    let code = if pass { exit::OK } else { exit::NEGATIVE };
    let report = json!({
        "command": "verify",
        "kind": kind,
        "pass": pass,
        "failure": detail,
        "exit_code": code,
    });
    sidecar(json, report).err().unwrap_or(code)
}

pub fn search(
    config: Option<PathBuf>,
    tol: Option<f64>,
    r: Option<u32>,
    margin: Option<f64>,
    out: &Path,
    json: Option<PathBuf>,
) -> u8 {
    let mut cfg = match &config {
        Some(path) => {
            let parsed = fs::read_to_string(path)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str::<SearchConfig>(&t).map_err(|e| e.to_string()));
            match parsed {
                Ok(c) => c,
                Err(e) => return fail(exit::INPUT, format!("{}: {e}", path.display())),
            }
        }
        None => SearchConfig::default(),
    };
    if let Some(t) = tol {
        cfg.tol = t;
    }
    if let Some(r) = r {
        cfg.multiplier_r = r;
    }
    if let Some(m) = margin {
        cfg.strictness_margin = m;
    }
    let res = match search_counterexample(&cfg) {
        Ok(res) => res,
        Err(e) => return fail(exit::INPUT, e.to_string()),
    };
    let transcript = res.to_string();
    print!("{transcript}");
    if let Err(code) = write_file(&out.join("transcript.txt"), &transcript) {
        return code;
    }
    if let Some(c) = &res.candidate {
        let terms: Vec<Value> = c.iter().map(|(m, v)| json!({"exps": m.exps(), "coeff": v})).collect();
        if let Err(code) = write_json(&out.join("candidate.json"), &json!({"nvars": cfg.nvars, "terms": terms})) {
            return code;
        }
    }
    let mut files = Vec::new();
    if let Some(c) = &res.certified {
        let names = default_names(cfg.nvars);
        let mut outputs: Vec<(&str, String)> = vec![("polynomial.txt", polynomial_text(&c.polynomial, &names))];
        let (cert, sep) = match &c.certification {
            Certification::Convexity(rep) => (rep.convexity_certificate(), rep.sos_convex.separation.as_ref()),
            Certification::PsdNotSos { psd, not_sos } => (psd.certificate.as_ref(), not_sos.separation.as_ref()),
        };
        if let Some(cert) = cert {
            outputs.push(("certificate.json", serde_json::to_string_pretty(cert).expect("serializes") + "\n"));
        }
        if let Some(sep) = sep {
            outputs.push(("separation.json", serde_json::to_string_pretty(sep).expect("serializes") + "\n"));
        }
        for (name, text) in outputs {
            let path = out.join(name);
            if let Err(code) = write_file(&path, &text) {
                return code;
            }
            files.push(path);
        }
    }
    println!("bundle written to {}", out.display());
    let code = match res.status {
        SearchStatus::Certified => exit::OK,
        SearchStatus::Infeasible => exit::INFEASIBLE,
        SearchStatus::Exhausted => exit::EXHAUSTED,
        SearchStatus::SolverFailure => exit::SOLVER,
    };
    let report = json!({
        "command": "search",
        "status": format!("{:?}", res.status),
        "multiplier_r": res.multiplier_r,
        "t": res.t,
        "polynomial": res.certified.as_ref().map(|c| c.polynomial.format_with(&default_names(cfg.nvars))),
        "files": files.iter().map(|f| f.display().to_string()).collect::<Vec<_>>(),
        "diagnostics": res.diagnostics,
        "exit_code": code,
    });
    sidecar(json, report).err().unwrap_or(code)
}

pub fn project(input: &Path, out: Option<PathBuf>, json: Option<PathBuf>) -> u8 {
    let (p, names) = match read_input(input) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let blocks = match full_blocks(&p) {
        Ok(b) => b,
        Err(e) => return fail(exit::INPUT, e.to_string()),
    };
    let pr = match project_onto_sos(&p, &blocks, &SosOptions::default().solver) {
        Ok(pr) => pr,
        Err(e) => return fail(exit::SOLVER, e.to_string()),
    };
    if pr.status != SdpStatus::Optimal {
        return fail(exit::SOLVER, format!("projection stopped with status {:?}", pr.status));
    }
    println!("form: {}", p.format_with(&names));
    println!("projection: {}", pr.projection.format_with(&names));
    println!("distance: {:.9e}", pr.distance);
    println!("hyperplane (projection - form) / distance:");
    for (m, v) in pr.monomials.iter().zip(&pr.hyperplane) {
        if v.abs() > 1e-12 {
            println!("  {}: {v:.9}", m.format_with(&names));
        }
    }
    if let Some(path) = &out {
        if let Err(code) = write_file(path, &polynomial_text(&pr.projection, &names)) {
            return code;
        }
        println!("projection written to {}", path.display());
    }
    let report = json!({
        "command": "project",
        "distance": pr.distance,
        "projection": pr.projection.format_with(&names),
        "hyperplane": pr.monomials.iter().zip(&pr.hyperplane)
            .map(|(m, v)| json!({"monomial": m.format_with(&names), "value": v}))
            .collect::<Vec<_>>(),
        "exit_code": exit::OK,
    });
    sidecar(json, report).err().unwrap_or(exit::OK)
}

pub fn hessian(input: &Path, json: Option<PathBuf>) -> u8 {
    let (p, names) = match read_input(input) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let h = p.hessian();
    print!("{}", h.format_with(&names));
    let rows: Vec<Vec<String>> = (0..h.rows())
        .map(|i| (0..h.cols()).map(|j| h.get(i, j).format_with(&names)).collect())
        .collect();
    let report = json!({"command": "hessian", "vars": names, "hessian": rows, "exit_code": exit::OK});
    sidecar(json, report).err().unwrap_or(exit::OK)
}
