//! Manifests shipped with the binary.

use crate::error::ManifestError;
use crate::manifest::{parse_claims, Manifest};

struct Builtin {
    name: &'static str,
    manifest: &'static str,
    expected: Option<&'static str>,
}

const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "paper-example-4-7",
        manifest: include_str!("../builtins/paper-example-4-7.json"),
        expected: Some(include_str!("../builtins/paper-example-4-7.expected.json")),
    },
    Builtin {
        name: "paper-example-4-7-repaired",
        manifest: include_str!("../builtins/paper-example-4-7-repaired.json"),
        expected: Some(include_str!("../builtins/paper-example-4-7-repaired.expected.json")),
    },
    Builtin {
        name: "paper-example-7-2",
        manifest: include_str!("../builtins/paper-example-7-2.json"),
        expected: Some(include_str!("../builtins/paper-example-7-2.expected.json")),
    },
    Builtin {
        name: "orthogonal-projection",
        manifest: include_str!("../builtins/orthogonal-projection.json"),
        expected: None,
    },
    Builtin {
        name: "warped-product",
        manifest: include_str!("../builtins/warped-product.json"),
        expected: None,
    },
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|b| b.name).collect()
}

fn find(name: &str) -> Result<&'static Builtin, ManifestError> {
    BUILTINS
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| ManifestError::UnknownExample(name.to_string()))
}

/// The manifest text as shipped.
pub fn builtin_manifest_text(name: &str) -> Result<&'static str, ManifestError> {
    Ok(find(name)?.manifest)
}

/// The expected-values sidecar, if the example has one.
pub fn builtin_expected_text(name: &str) -> Result<Option<&'static str>, ManifestError> {
    Ok(find(name)?.expected)
}

pub fn builtin_example(name: &str) -> Result<Manifest, ManifestError> {
    let b = find(name)?;
    let mut manifest = Manifest::from_json(b.manifest)?;
    if let Some(text) = b.expected {
        manifest.claims = parse_claims(text)?;
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{gidx, Convention};

    #[test]
    fn every_builtin_loads() {
        for name in builtin_names() {
            builtin_example(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn unknown_name_is_rejected() {
        assert!(matches!(builtin_example("nope"), Err(ManifestError::UnknownExample(_))));
    }

    #[test]
    fn six_dimensional_example_has_printed_coefficients() {
        let m = builtin_example("paper-example-4-7").unwrap();
        assert_eq!(m.dim(), 6);
        assert_eq!(m.conventions, vec![Convention::Plus, Convention::Minus]);
        let local = m.source.local(&[0.3, -0.1, 0.2, 0.0, 0.5, -0.4], 1).unwrap();
        let g = local.g();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(g[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
        let gamma = local.gamma_values(crate::geometry::ConnectionChoice::Nabla);
        for k in 0..6 {
            for i in 0..6 {
                for j in 0..6 {
                    let expected = if (k == 5 && i == j && i < 5) || (k == i && j == 5 && i < 5) {
                        1.0
                    } else {
                        0.0
                    };
                    assert_eq!(gamma[gidx(6, k, i, j)], expected, "G^{k}_{i}{j}");
                }
            }
        }
        assert!(!m.claims.is_empty());
    }

    #[test]
    fn pairing_example_carries_map_and_soliton_block() {
        let m = builtin_example("paper-example-7-2").unwrap();
        let setup = m.setup.as_ref().unwrap();
        assert_eq!(setup.n(), 3);
        let j = setup.map.jacobian(&[0.0; 6]).unwrap();
        let s = 0.5f64.sqrt();
        assert!((j[0][0] - s).abs() < 1e-15 && (j[0][1] - s).abs() < 1e-15 && j[0][2] == 0.0);
        let plan = m.soliton.as_ref().unwrap();
        assert_eq!(plan.lambda, crate::solitons::LambdaSpec::Solve);
        assert_eq!(plan.rhos, vec![0.5, 0.2, 0.0]);
    }
}
