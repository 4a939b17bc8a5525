use nlsgap::{OperatorSelection, RunConfig};
use proptest::prelude::*;

#[test]
fn sectioned_file() {
    let text = r#"
operator = "lplus"
bisection_tol = 1e-9

[groundstate]
r_max = 25.0

[verify]
lambda_grid = [0.1, 0.5, 1.0]
t0_grid_step = 0.02

[output]
report = "out/report.json"
"#;
    let cfg = RunConfig::from_toml(text).unwrap();
    assert_eq!(cfg.operator, OperatorSelection::Lplus);
    assert_eq!(cfg.groundstate.r_max, 25.0);
    assert_eq!(cfg.verify.lambda_grid, vec![0.1, 0.5, 1.0]);
    assert_eq!(cfg.verify.tol, 1e-10);
    assert_eq!(cfg.output.report.to_str(), Some("out/report.json"));
}

#[test]
fn out_of_range_grids_rejected() {
    assert!(RunConfig::from_toml("[verify]\nt0_range = [0.1, 1.5]").is_err());
    assert!(RunConfig::from_toml("[verify]\nlambda_grid = []").is_err());
    assert!(RunConfig::from_toml("[verify]\nlambda_grid = [0.5]").is_err());
    assert!(RunConfig::from_toml("[verify]\ntol = 0.0").is_err());
    assert!(RunConfig::from_toml("operator = \"sideways\"").is_err());
}

proptest! {
    #[test]
    fn round_trip(
        mut grid in prop::collection::vec(1e-3f64..1.0, 0..8),
        step in 1e-3f64..0.5,
        tol in 1e-14f64..1e-6,
        op in 0usize..3,
    ) {
        grid.push(1.0);
        let mut cfg = RunConfig::default();
        cfg.verify.lambda_grid = grid;
        cfg.verify.t0_grid_step = step;
        cfg.bisection_tol = tol;
        cfg.operator = [OperatorSelection::Lplus, OperatorSelection::Lminus, OperatorSelection::Both][op];
        let back = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
