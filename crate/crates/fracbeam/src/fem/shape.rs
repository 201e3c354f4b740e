//! Element interpolation: linear Lagrange for the axial displacement and
//! cubic Hermite for the deflection and its slope.
//!
//! All functions take the local coordinate xi in [0, le] and return nodal
//! weight arrays ordered (node 1, node 2) for Lagrange and
//! (w1, w1', w2, w2') for Hermite. Slope degrees of freedom are
//! dimensional, so the Hermite slope shapes carry a factor of le.

/// Linear Lagrange pair at xi.
pub fn lagrange(xi: f64, le: f64) -> [f64; 2] {
    check_local(xi, le);
    let t = xi / le;
    [1.0 - t, t]
}

/// First derivatives of the Lagrange pair (constant over the element).
pub fn lagrange_deriv(le: f64) -> [f64; 2] {
    [-1.0 / le, 1.0 / le]
}

/// Cubic Hermite quadruple at xi.
pub fn hermite(xi: f64, le: f64) -> [f64; 4] {
    check_local(xi, le);
    let t = xi / le;
    let t2 = t * t;
    let t3 = t2 * t;
    [
        1.0 - 3.0 * t2 + 2.0 * t3,
        le * (t - 2.0 * t2 + t3),
        3.0 * t2 - 2.0 * t3,
        le * (t3 - t2),
    ]
}

/// First derivatives of the Hermite quadruple at xi.
pub fn hermite_deriv(xi: f64, le: f64) -> [f64; 4] {
    check_local(xi, le);
    let t = xi / le;
    let t2 = t * t;
    [
        6.0 * (t2 - t) / le,
        1.0 - 4.0 * t + 3.0 * t2,
        6.0 * (t - t2) / le,
        3.0 * t2 - 2.0 * t,
    ]
}

/// Second derivatives of the Hermite quadruple at xi.
pub fn hermite_second(xi: f64, le: f64) -> [f64; 4] {
    check_local(xi, le);
    let t = xi / le;
    [
        (12.0 * t - 6.0) / (le * le),
        (6.0 * t - 4.0) / le,
        (6.0 - 12.0 * t) / (le * le),
        (6.0 * t - 2.0) / le,
    ]
}

fn check_local(xi: f64, le: f64) {
    assert!(
        (-1e-12 * le..=le * (1.0 + 1e-12)).contains(&xi),
        "local coordinate {xi} outside element [0, {le}]"
    );
}
