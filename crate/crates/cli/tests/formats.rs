use logmod::extension::{PatternRepresentation, PositiveMapOnMatrices};
use logmod::outer::{AnalyticPoly, BoundaryFunction};
use logmod::{ComplexMatrix, Pattern, C64};
use logmod_cli::io::{
    emit, parse_str, BoundaryFile, CoeffsFile, IoError, MatrixFile, PatternFile, PositiveMapFile, RepresentationFile,
    Scalar,
};
use proptest::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Emit, parse back, and emit again; both texts must agree byte for byte.
fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(value: &T) -> T {
    let text = emit(value).unwrap();
    let back: T = parse_str(&text, "mem").unwrap();
    assert_eq!(&back, value);
    assert_eq!(emit(&back).unwrap(), text);
    back
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -1e3f64..1e3,
        Just(0.0),
        Just(-0.0),
    ]
}

fn matrix(max: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        prop::collection::vec((finite(), finite()), r * c).prop_map(move |v| {
            ComplexMatrix::new(r, c, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap()
        })
    })
}

#[test]
fn pattern_indices_are_one_based() {
    let f: PatternFile = parse_str(r#"{"n": 3, "pairs": [[1, 2], [2, 3], [1, 3]]}"#, "mem").unwrap();
    let p = f.to_pattern().unwrap();
    assert_eq!(p, Pattern::upper_triangular(3).unwrap());
    let zero: PatternFile = parse_str(r#"{"n": 2, "pairs": [[0, 1]]}"#, "mem").unwrap();
    assert!(zero.to_pattern().is_err());
}

#[test]
fn boundary_values_may_be_real_numbers() {
    let f: BoundaryFile = parse_str(r#"{"grid_log2": 1, "values": [2, [3.5, 0]]}"#, "mem").unwrap();
    assert_eq!(f.values, vec![Scalar::Real(2.0), Scalar::Complex([3.5, 0.0])]);
    let g = f.to_function().unwrap();
    assert_eq!(g.values(), &[C64::new(2.0, 0.0), C64::new(3.5, 0.0)]);
}

#[test]
fn unknown_fields_are_rejected() {
    assert!(matches!(
        parse_str::<MatrixFile>(r#"{"rows": 1, "cols": 1, "data": [[1, 0]], "extra": 1}"#, "mem"),
        Err(IoError::Parse { .. })
    ));
}

#[test]
fn mismatched_matrix_shape() {
    let f: MatrixFile = parse_str(r#"{"rows": 2, "cols": 2, "data": [[1, 0]]}"#, "mem").unwrap();
    assert!(f.to_matrix().is_err());
}

#[test]
fn non_finite_values_cannot_be_emitted() {
    let f = MatrixFile { rows: 1, cols: 1, data: vec![[f64::NAN, 0.0]] };
    assert!(matches!(emit(&f), Err(IoError::Emit(_))));
}

#[test]
fn representation_round_trip() {
    let p = Pattern::block_upper_triangular(&[2, 1]).unwrap();
    let rep = PatternRepresentation::identity(p.clone())
        .direct_sum(&PatternRepresentation::corner(p, 2).unwrap())
        .unwrap();
    let file = round_trip(&RepresentationFile::from_representation(&rep));
    let back = file.to_representation().unwrap();
    assert_eq!(back.dim(), 4);
    for ((a, x), (b, y)) in rep.units().zip(back.units()) {
        assert_eq!(a, b);
        assert_eq!(x, y);
    }
}

#[test]
fn positive_map_round_trip() {
    let map = PositiveMapOnMatrices::identity(3);
    let file = round_trip(&PositiveMapFile::from_map(&map));
    assert_eq!(file.to_map().unwrap(), map);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn matrices_round_trip(m in matrix(5)) {
        let file = round_trip(&MatrixFile::from_matrix(&m));
        let back = file.to_matrix().unwrap();
        for (a, b) in back.data().iter().zip(m.data()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn patterns_round_trip(n in 1usize..7, bits in prop::collection::vec(any::<bool>(), 36)) {
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| bits[i * 6 + j]).collect();
        let p = Pattern::new(n, &pairs).unwrap();
        let file = round_trip(&PatternFile::from_pattern(&p));
        prop_assert_eq!(file.to_pattern().unwrap(), p);
    }

    #[test]
    fn boundary_functions_round_trip(k in 0u32..6, seed in any::<u64>()) {
        let f = BoundaryFunction::from_fn(k, |t| 1.5 + (t + seed as f64).sin()).unwrap();
        let file = round_trip(&BoundaryFile::from_function(&f));
        prop_assert_eq!(file.to_function().unwrap(), f);
    }

    #[test]
    fn coefficients_round_trip(c in prop::collection::vec((finite(), finite()), 1..10)) {
        let q = AnalyticPoly::new(c.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap();
        let file = round_trip(&CoeffsFile::from_analytic(&q));
        prop_assert_eq!(file.to_analytic().unwrap(), q);
    }
}
