use crate::error::{Error, Result};

/// Converged fixed point and how it was reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub x: f64,
    /// Number of updater calls.
    pub iterations: usize,
    /// Distance between the last two iterates.
    pub distance: f64,
}

/// Absolute difference; the metric used for scalar iterations.
pub fn distance(x: f64, y: f64) -> f64 {
    (x - y).abs()
}

/// Iterates `x <- update(x)` from `x_guess` until `distance(x_new, x) < epsilon`.
///
/// The updater closes over the function it updates with (and any extra
/// parameters). At most `max_iter` updates are made.
pub fn fixed_point_solve<U, D>(
    mut update: U,
    distance: D,
    epsilon: f64,
    max_iter: usize,
    x_guess: f64,
) -> Result<FixedPoint>
where
    U: FnMut(f64) -> Result<f64>,
    D: Fn(f64, f64) -> f64,
{
    let mut step = |x: f64| -> Result<f64> {
        let next = update(x)?;
        if next.is_finite() {
            Ok(next)
        } else {
            Err(Error::NonFinite {
                value: next,
                from: x,
            })
        }
    };

    let mut guess = x_guess;
    let mut improve = step(guess)?;
    let mut iterations = 1;
    let mut dist = distance(improve, guess);
    while dist >= epsilon {
        if iterations >= max_iter {
            return Err(Error::NonConvergence {
                iterations,
                last: improve,
                distance: dist,
            });
        }
        guess = improve;
        improve = step(guess)?;
        iterations += 1;
        dist = distance(improve, guess);
    }
    Ok(FixedPoint {
        x: improve,
        iterations,
        distance: dist,
    })
}

/// Direct update: the next iterate is `f(x)`.
pub fn update_direct<F>(f: F, x: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    f(x)
}

/// One Newton step with a forward-difference slope `(f(x + h) - f(x)) / h`.
pub fn update_newton<F>(f: F, x: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let fx = f(x)?;
    let slope = (f(x + h)? - fx) / h;
    if !(slope.abs() >= 1e-14) {
        return Err(Error::DegenerateDerivative { slope, x });
    }
    Ok(x - fx / slope)
}

/// Start value found by bisection, plus whether `[a, b]` actually bracketed a root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitValue {
    pub x: f64,
    /// `false` when `f(a)` and `f(b)` have the same sign; `x` is then just
    /// where the halving ended up and should not be trusted.
    pub bracketed: bool,
}

/// Halves `[a, b]` until its width is at most `h` and returns the midpoint.
pub fn get_init_value<F>(f: F, a: f64, b: f64, h: f64) -> Result<InitValue>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(a < b) {
        return Err(Error::Domain {
            name: "a",
            value: a,
            expected: "a < b",
        });
    }
    if !(h > 0.0) {
        return Err(Error::Domain {
            name: "h",
            value: h,
            expected: "h > 0",
        });
    }
    let bracketed = f(a)? * f(b)? <= 0.0;

    let (mut a, mut b) = (a, b);
    let mut width = (a - b).abs();
    let mut guess = 0.5 * (a + b);
    while width > h {
        if f(guess)? * f(a)? > 0.0 {
            a = guess;
        } else {
            b = guess;
        }
        width /= 2.0;
        guess = 0.5 * (a + b);
    }
    Ok(InitValue {
        x: guess,
        bracketed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_fixed_point() {
        // Dottie number, reference value from long iteration.
        let mut x = 1.0_f64;
        for _ in 0..10_000 {
            x = x.cos();
        }
        let fp = fixed_point_solve(|x| Ok(x.cos()), distance, 1e-8, 1000, 1.0).unwrap();
        assert!((fp.x - x).abs() < 1e-6);
        assert!((fp.x - 0.739_085_1).abs() < 1e-6);
    }

    #[test]
    fn identity_converges_immediately() {
        let fp = fixed_point_solve(Ok, distance, 1e-8, 10, 3.25).unwrap();
        assert_eq!(fp.x, 3.25);
        assert_eq!(fp.iterations, 1);
    }

    #[test]
    fn newton_sqrt_two() {
        let f = |x: f64| Ok(x * x - 2.0);
        let fp = fixed_point_solve(|x| update_newton(f, x, 1e-5), distance, 1e-10, 100, 1.5).unwrap();
        assert!((fp.x - std::f64::consts::SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn newton_on_affine_function() {
        let f = |x: f64| Ok(2.0 * x - 3.0);
        for x0 in [-4.0, 0.0, 1.0, 10.0] {
            let x1 = update_newton(f, x0, 1e-5).unwrap();
            assert!((x1 - 1.5).abs() < 1e-8, "{x1}");
        }
    }

    #[test]
    fn flat_function_is_degenerate() {
        let err = update_newton(|_| Ok(1.0), 0.5, 1e-5).unwrap_err();
        assert!(matches!(err, Error::DegenerateDerivative { .. }));
    }

    #[test]
    fn iteration_cap() {
        // x -> x + 1 never settles.
        let err = fixed_point_solve(|x| Ok(x + 1.0), distance, 1e-8, 25, 0.0).unwrap_err();
        match err {
            Error::NonConvergence {
                iterations,
                last,
                distance,
            } => {
                assert_eq!(iterations, 25);
                assert_eq!(last, 25.0);
                assert_eq!(distance, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn errors_from_f_propagate() {
        let err = fixed_point_solve(
            |_| {
                Err(Error::Domain {
                    name: "x",
                    value: 0.0,
                    expected: "test",
                })
            },
            distance,
            1e-8,
            10,
            0.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain { name: "x", .. }));
        let nan = fixed_point_solve(|_| Ok(f64::NAN), distance, 1e-8, 10, 0.0).unwrap_err();
        assert!(matches!(nan, Error::NonFinite { .. }));
    }

    #[test]
    fn bisection_linear_root() {
        let init = get_init_value(|x| Ok(x - 2.0), 0.0, 3.0, 0.05).unwrap();
        assert!(init.bracketed);
        assert!((init.x - 2.0).abs() <= 0.05);
        assert!(init.x > 0.0 && init.x < 3.0);
    }

    #[test]
    fn bisection_without_sign_change_is_flagged() {
        let init = get_init_value(|x| Ok(x * x + 1.0), 0.0, 3.0, 0.05).unwrap();
        assert!(!init.bracketed);
        assert!(init.x > 0.0 && init.x < 3.0);
    }

    #[test]
    fn bisection_rejects_bad_interval() {
        assert!(get_init_value(Ok, 1.0, 1.0, 0.05).is_err());
        assert!(get_init_value(Ok, 0.0, 1.0, 0.0).is_err());
    }
}
