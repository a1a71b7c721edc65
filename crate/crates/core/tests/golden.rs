use approx::assert_abs_diff_eq;
use serde_json::{json, Value};
use tfim_core::experiments::config_hash;
use tfim_core::quantum::{ground_state, reduced_density, DensityMatrix, Hamiltonian};

/// One site of the two-site chain: `ρ = (1 + ⟨σ¹⟩ σ¹)/2` with
/// `⟨σ¹⟩ = 2h/√(J² + 4h²)`.
#[test]
fn two_site_density_json() {
    let (j, h) = (1.0, 1.0);
    let gs = ground_state(&Hamiltonian::new(2, j, h).unwrap()).unwrap();
    let rho = reduced_density(&gs.state, 2, 0..1).unwrap();
    let v: Value = serde_json::to_value(&rho).unwrap();

    let off = h / (j * j + 4.0 * h * h).sqrt();
    let golden = json!({
        "dim": 2,
        "real": [[0.5, off], [off, 0.5]],
        "imag": [[0.0, 0.0], [0.0, 0.0]],
        "eigenvalues": [0.5 + off, 0.5 - off],
    });
    let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    assert_eq!(keys, ["dim", "eigenvalues", "imag", "real"]);
    assert_eq!(v["dim"], golden["dim"]);
    assert_eq!(v["imag"], golden["imag"]);
    for key in ["real", "eigenvalues"] {
        let got: Vec<f64> = flatten(&v[key]);
        let want: Vec<f64> = flatten(&golden[key]);
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    let back: DensityMatrix = serde_json::from_value(v).unwrap();
    assert_abs_diff_eq!((back.matrix() - rho.matrix()).amax(), 0.0, epsilon = 1e-15);
}

fn flatten(v: &Value) -> Vec<f64> {
    match v {
        Value::Array(xs) => xs.iter().flat_map(flatten).collect(),
        x => vec![x.as_f64().unwrap()],
    }
}

#[test]
fn complex_density_is_rejected() {
    let v = json!({"dim": 1, "real": [[1.0]], "imag": [[0.5]], "eigenvalues": [1.0]});
    assert!(serde_json::from_value::<DensityMatrix>(v).is_err());
}

#[test]
fn config_hash_matches_git_blob_digest() {
    // sha256("blob 0\0")
    assert_eq!(config_hash(b""), "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813");
}
