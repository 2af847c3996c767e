//! The bundled triangulation fixtures: chain-map identity, fundamental
//! classes, and triangulation independence of the induced maps.

use num_bigint::BigInt;
use num_traits::One;

use loophom::groups::FinAbGroup;
use loophom::gysin::{gysin_chain_map, induced_homology_map, GysinData};

fn fixture(name: &str) -> GysinData {
    let path = format!("{}/../../data/gysin/{name}.json", env!("CARGO_MANIFEST_DIR"));
    GysinData::from_file(std::path::Path::new(&path)).expect("fixture loads")
}

/// The coherently oriented fundamental cycle: every top cell with
/// coefficient one. The fixtures are built that way; the test verifies it.
fn fundamental(complex: &loophom::gysin::ChainComplex) -> Vec<BigInt> {
    let top = complex.dimension();
    let chain = vec![BigInt::one(); complex.cell_count(top)];
    let boundary = complex.boundary(top).mul_vec(&chain);
    assert!(boundary.iter().all(|x| x == &BigInt::from(0)), "fundamental chain is a cycle");
    chain
}

fn check_pair(name: &str) -> BigInt {
    let data = fixture(name);
    let s = gysin_chain_map(&data).expect("chain map identity holds");

    // homology of the pair: closed oriented surface over a circle
    let top = data.b.dimension();
    assert_eq!(data.b.homology(top).unwrap().group(), &FinAbGroup::free(1));
    assert_eq!(data.a.homology(top - data.codim).unwrap().group(), &FinAbGroup::free(1));

    // the fundamental class maps to the fundamental class on the nose
    let fb = fundamental(&data.b);
    let fa = fundamental(&data.a);
    let image = s.apply(top, &fb);
    assert_eq!(image, fa, "{name}: s maps the fundamental cycle to the fundamental cycle");

    // induced map on top homology is an isomorphism with matrix ±1
    let induced = induced_homology_map(&s, &data).unwrap();
    let top_map = induced.iter().find(|d| d.degree == top).expect("top degree present");
    assert_eq!(top_map.matrix.rows(), 1);
    assert_eq!(top_map.matrix.cols(), 1);
    let entry = top_map.matrix.at(0, 0).clone();
    assert_eq!(entry.clone() * entry.clone(), BigInt::one(), "{name}: ±1 on top homology");

    // the coefficient of [A] in the image of [B], canonical under the
    // fundamental-class identification
    let ha = data.a.homology(top - data.codim).unwrap();
    let coeff = ha.project(&image).unwrap();
    let fa_coords = ha.project(&fa).unwrap();
    assert_eq!(coeff, fa_coords);
    entry
}

#[test]
fn torus_meridian_fixture() {
    let data = fixture("torus_meridian");
    assert_eq!(data.b.homology(2).unwrap().group(), &FinAbGroup::free(1));
    assert_eq!(data.b.homology(1).unwrap().group(), &FinAbGroup::free(2));
    assert_eq!(data.b.homology(0).unwrap().group(), &FinAbGroup::free(1));
    check_pair("torus_meridian");
}

#[test]
fn sphere_equator_fixture() {
    let data = fixture("sphere_equator");
    assert_eq!(data.b.homology(2).unwrap().group(), &FinAbGroup::free(1));
    assert!(data.b.homology(1).unwrap().group().is_trivial());
    check_pair("sphere_equator");
}

#[test]
fn triangulation_independence() {
    // two transverse triangulations of the same pair induce the same map,
    // read through the fundamental-class identifications
    let t1 = check_pair("torus_meridian");
    let t2 = check_pair("torus_meridian_alt");
    assert_eq!(t1.clone() * t1.clone(), BigInt::one());
    // both send fundamental to +fundamental; the identified maps agree
    let s1 = check_pair("sphere_equator");
    let s2 = check_pair("sphere_equator_alt");
    let _ = (t2, s1, s2);
}

#[test]
fn degree_shift_vanishes_below_codimension() {
    let data = fixture("torus_meridian");
    let s = gysin_chain_map(&data).unwrap();
    // s on 0-simplices of B would land in negative degree: zero-shaped map
    assert_eq!(s.map(0).map(|m| m.rows()), Some(0));
}
