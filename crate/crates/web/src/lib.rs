//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function returns a JSON string; the `*_json` functions
//! behind them are plain Rust so they can be tested natively.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rxtx_core::discovery::{discover, DiscoveryConfig};
use rxtx_core::opcount::{csv_columns, decimal6, emit_ratio_table, ratio_f64, TableOptions};
use rxtx_core::{
    count_recurrence, export_scheme, import_scheme, naive_gram, rxtx_gram, rxtx_scheme, strassen_xxt_gram,
    strassen_xxt_scheme, verify_scheme, Algorithm, DenseMatrix, ExactInt, GemmBackend, GramOptions, Metric,
    OpCounter, PlanKind,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

type Out = Result<String, String>;

fn json<T: Serialize>(v: &T) -> Out {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct CurveRow {
    n: u64,
    /// Ratio name → value; `None` where RXTX is undefined at this size.
    ratios: Vec<(String, Option<f64>)>,
    /// Same ratios as exact 6-decimal strings.
    exact: Vec<Option<String>>,
}

#[derive(Serialize)]
struct Curves {
    columns: Vec<&'static str>,
    rows: Vec<CurveRow>,
}

pub fn ratio_curves_json(max_exp: u32, pow2: bool) -> Out {
    let table = emit_ratio_table(max_exp, TableOptions { include_opt: true, powers_of_two: pow2 })
        .map_err(|e| e.to_string())?;
    let rows = table
        .rows
        .iter()
        .map(|row| {
            let ratios = row.ratios();
            CurveRow {
                n: row.n,
                exact: ratios.iter().map(|(_, p)| p.map(|(a, b)| decimal6(a, b))).collect(),
                ratios: ratios.into_iter().map(|(name, p)| (name.to_string(), p.map(|(a, b)| ratio_f64(a, b)))).collect(),
            }
        })
        .collect();
    json(&Curves { columns: csv_columns(true), rows })
}

#[derive(Serialize)]
struct GramRun {
    algorithm: String,
    n: usize,
    cutoff: usize,
    mults: u64,
    adds: u64,
    total: u64,
    /// Recurrence prediction when the run matches its assumptions.
    predicted_mults: Option<String>,
    predicted_total: Option<String>,
    equals_naive: bool,
    symmetric: bool,
    corner: Vec<Vec<i64>>,
}

/// Runs one X·Xᵗ on a random integer matrix (entries in [−9, 9]) with
/// instrumented Strassen–Winograd general products.
pub fn run_gram_json(algorithm: &str, n: usize, cutoff: usize, seed: u32) -> Out {
    if n == 0 || n > 256 {
        return Err("n must be between 1 and 256".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(u64::from(seed));
    let x = DenseMatrix::<ExactInt>::random_int(n, n, -9, 9, &mut rng);
    let counter = Arc::new(OpCounter::new());
    let be = GemmBackend::strassen_winograd(1).with_counter(counter.clone());
    let opts = GramOptions::cutoff(cutoff.max(1));
    let (alg, got) = match algorithm {
        "rxtx" => (Algorithm::Rxtx, rxtx_gram(&x, opts, &be, PlanKind::Optimized)),
        "rxtx-direct" => (Algorithm::Rxtx, rxtx_gram(&x, opts, &be, PlanKind::Direct)),
        "strassen-xxt" => (Algorithm::StrassenXxt, strassen_xxt_gram(&x, opts, &be)),
        "naive" => (
            Algorithm::NaiveGram,
            rxtx_core::matrix::naive_gram_counted(&x, Some(&counter)),
        ),
        other => return Err(format!("unknown algorithm `{other}`")),
    };
    let got = got.map_err(|e| e.to_string())?;
    let want = naive_gram(&x).map_err(|e| e.to_string())?;
    let c = counter.snapshot();
    let optimized_rxtx = algorithm != "rxtx-direct";
    let predict = |m| {
        (cutoff <= 1 && optimized_rxtx)
            .then(|| count_recurrence(alg, m, n as u64).ok())
            .flatten()
            .map(|v| v.to_string())
    };
    let k = n.min(4);
    json(&GramRun {
        algorithm: algorithm.into(),
        n,
        cutoff: opts.cutoff,
        mults: c.mults,
        adds: c.adds,
        total: c.total(),
        predicted_mults: predict(Metric::Mults),
        predicted_total: predict(Metric::TotalOps),
        equals_naive: got == want,
        symmetric: got.is_symmetric(),
        corner: (0..k).map(|i| (0..k).map(|j| got.get(i, j).0).collect()).collect(),
    })
}

#[derive(Serialize)]
struct VerifyResult {
    grid: usize,
    algebra: String,
    products: usize,
    calls: usize,
    checked: usize,
    passed: usize,
    failures: Vec<String>,
}

pub fn verify_scheme_json(text: &str) -> Out {
    let scheme = import_scheme(text).map_err(|e| e.to_string())?;
    let v = verify_scheme(&scheme).map_err(|e| e.to_string())?;
    json(&VerifyResult {
        grid: scheme.grid,
        algebra: scheme.algebra.to_string(),
        products: scheme.products.len(),
        calls: scheme.calls.len(),
        checked: v.checked,
        passed: v.passed(),
        failures: v.failures.iter().map(|f| f.to_string()).collect(),
    })
}

/// Scheme text for `rxtx`, `strassen-xxt`, or `discovered-2x2` (found by
/// exhaustive search on the spot).
pub fn scheme_text(name: &str) -> Out {
    match name {
        "rxtx" => Ok(export_scheme(rxtx_scheme())),
        "strassen-xxt" => Ok(export_scheme(strassen_xxt_scheme())),
        "discovered-2x2" => {
            let d = discover(&DiscoveryConfig::default()).map_err(|e| e.to_string())?;
            Ok(export_scheme(&d.scheme))
        }
        other => Err(format!("unknown scheme `{other}`")),
    }
}

fn js(r: Out) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = ratioCurves)]
pub fn ratio_curves(max_exp: u32, pow2: bool) -> Result<String, JsError> {
    js(ratio_curves_json(max_exp, pow2))
}

#[wasm_bindgen(js_name = runGram)]
pub fn run_gram(algorithm: &str, n: usize, cutoff: usize, seed: u32) -> Result<String, JsError> {
    js(run_gram_json(algorithm, n, cutoff, seed))
}

#[wasm_bindgen(js_name = verifyScheme)]
pub fn verify_scheme_text(text: &str) -> Result<String, JsError> {
    js(verify_scheme_json(text))
}

#[wasm_bindgen(js_name = schemeText)]
pub fn scheme_text_js(name: &str) -> Result<String, JsError> {
    js(scheme_text(name))
}
