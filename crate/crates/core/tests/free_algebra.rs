use num_rational::BigRational;
use sdefw_core::extrapolation::solve_weights;
use sdefw_core::free_algebra::{
    critical_check, first_nonvanishing_degree, fujiwara_expansion_check, order_condition_check,
    AlgebraDims,
};

#[test]
fn critical_conditions_for_four_levels() {
    let scheme = solve_weights::<BigRational>(&[1, 2, 3, 4]).unwrap();
    for l in [2, 3] {
        let dims = AlgebraDims::new(1, 2 * 4 + l - 1).unwrap();
        let out = critical_check(&scheme, l, dims).unwrap();
        assert!(out.pass, "{out}");
    }
}

#[test]
fn order_eight_for_four_levels() {
    let scheme = solve_weights::<BigRational>(&[1, 2, 3, 4]).unwrap();
    let dims = AlgebraDims::new(1, 9).unwrap();
    assert!(order_condition_check(&scheme, dims).unwrap().pass);
    assert_eq!(first_nonvanishing_degree(&scheme, dims).unwrap(), Some(9));
}

#[test]
fn expansion_identity_up_to_degree_five() {
    for d in 1..=2 {
        let dims = AlgebraDims::new(d, 5).unwrap();
        let out = fujiwara_expansion_check::<BigRational>(dims).unwrap();
        assert!(out.pass, "{out}");
    }
}
