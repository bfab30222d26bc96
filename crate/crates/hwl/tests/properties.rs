//! Randomized invariants for the geometric sampler layer.

use hwl::geometry::Window;
use proptest::prelude::*;

fn any_window() -> impl Strategy<Value = Window> {
    prop_oneof![
        Just(Window::Interval),
        Just(Window::ball(2).unwrap()),
        Just(Window::ball(3).unwrap()),
        Just(Window::cube(2).unwrap()),
        Just(Window::cube(3).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The shell between volumes t and t+h always has volume h·|Δ(1)|.
    #[test]
    fn shell_volume_is_h_times_unit_volume(
        w in any_window(),
        t in 0.0f64..4.0,
        h in 1e-3f64..1.0,
    ) {
        let shell = w.shell(t, h).unwrap();
        let expected = h * w.unit_volume();
        prop_assert!((shell.volume() - expected).abs() <= 1e-12 * expected.max(1.0));
    }

    /// Inverse-transform points land inside the shell they were drawn for.
    #[test]
    fn from_unit_lands_in_shell(
        w in any_window(),
        t in 0.0f64..2.0,
        h in 1e-3f64..0.5,
        u in proptest::collection::vec(0.0f64..1.0, 9),
    ) {
        let shell = w.shell(t, h).unwrap();
        if let Some(k) = shell.unit_dims() {
            let p = shell.from_unit(&u[..k]);
            prop_assert!(shell.contains(&p), "point {p:?} escaped shell t={t} h={h}");
        }
    }

    /// Boundary points sit on the boundary of the scaled window: inside
    /// Δ(t(1+ε)) but outside Δ(t(1−ε)).
    #[test]
    fn boundary_points_sit_on_the_boundary(
        w in any_window(),
        t in 0.05f64..3.0,
        seed in 0u64..1_000,
    ) {
        let pts = hwl::geometry::boundary_sample(&w, t, 4, seed).unwrap();
        let eps = 1e-9;
        for p in &pts {
            prop_assert!(w.contains_scaled(w.scale(t) * (1.0 + eps), p));
            prop_assert!(!w.contains_scaled(w.scale(t) * (1.0 - eps), p));
        }
    }
}
