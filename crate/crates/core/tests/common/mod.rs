#![allow(dead_code)]

use urgp::reformulate::{RandomProgram, Term, UrgpProblem};
use urgp::LinearNormalUrv;

fn term(ma: f64, sa: f64, mb: f64, sb: f64, e: &[f64]) -> Term<LinearNormalUrv> {
    Term { coeff: LinearNormalUrv::from_params(ma, sa, mb, sb).unwrap(), exponents: e.to_vec() }
}

/// Three-variable example with one constraint and four uncertain random
/// coefficients.
pub fn problem14() -> UrgpProblem {
    RandomProgram::new(
        vec![term(50.0, 3.0, 40.0, 2.0, &[-1.0, -1.0, -1.0]), term(45.0, 2.0, 40.0, 1.0, &[1.0, 0.0, 1.0])],
        vec![vec![
            term(1.0, 1.0 / 3.0, 1.5, 2.0 / 3.0, &[1.0, 1.0, 0.0]),
            term(2.0 / 3.0, 1.0 / 3.0, 4.0 / 3.0, 1.0, &[0.0, 1.0, 1.0]),
        ]],
        vec!["x1".into(), "x2".into(), "x3".into()],
    )
    .unwrap()
}

/// Published optima at α = 0.1..0.9, ε = 0.05: `[x1, x2, x3, x4, x5, objective]`.
pub const TABLE1: [[f64; 6]; 9] = [
    [1.454, 0.167, 1.233, 39.882, 0.056, 219.893],
    [1.409, 0.183, 1.219, 31.919, 0.051, 213.316],
    [1.361, 0.201, 1.207, 27.584, 0.047, 206.732],
    [1.310, 0.223, 1.199, 26.036, 0.042, 200.180],
    [1.254, 0.247, 1.195, 26.533, 0.038, 193.715],
    [1.194, 0.274, 1.197, 28.480, 0.034, 187.493],
    [1.132, 0.304, 1.208, 31.494, 0.031, 181.885],
    [1.075, 0.332, 1.225, 35.514, 0.030, 177.570],
    [1.033, 0.354, 1.242, 40.852, 0.032, 175.417],
];

pub const ALPHAS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Optima of the same nine problems from an independent SQP solve of the
/// unlifted program at tight tolerance, same column layout as [`TABLE1`]
/// (x4 and x5 are the objective and constraint variances).
pub const TABLE1_REFERENCE: [[f64; 6]; 9] = [
    [1.4544889263, 0.1667753079, 1.2333349376, 39.9399817610, 0.0555650809, 220.0911741265],
    [1.4097301858, 0.1827152915, 1.2193767956, 31.9635044967, 0.0511567038, 213.4993361243],
    [1.3618767567, 0.2011193792, 1.2075421257, 27.6204234325, 0.0465786601, 206.9015834711],
    [1.3103748048, 0.2223558680, 1.1989278817, 26.0685138765, 0.0419411389, 200.3370912623],
    [1.2546874610, 0.2466907651, 1.1950230229, 26.5651158555, 0.0374469363, 193.8614603817],
    [1.1948606597, 0.2740090237, 1.1976487289, 28.5118293176, 0.0334489319, 187.6299700835],
    [1.1329823106, 0.3032203135, 1.2082129742, 31.5279096776, 0.0305332425, 182.0152388704],
    [1.0755060257, 0.3314019385, 1.2253579581, 35.5512865781, 0.0296151935, 177.6973454109],
    [1.0335047446, 0.3537007574, 1.2423846152, 40.8963769360, 0.0319304882, 175.5499198978],
];
