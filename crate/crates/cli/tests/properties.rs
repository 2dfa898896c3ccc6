use proptest::prelude::*;
use sps_cli::config::{parse_config_str, Param, Scale, SweepAxis};
use sps_cli::emit::{float, read_csv, write_csv, Row};

fn cell() -> impl Strategy<Value = Option<f64>> {
    prop_oneof![Just(None), any::<f64>().prop_filter("finite", |x| x.is_finite()).prop_map(Some)]
}

proptest! {
    #[test]
    fn floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn csv_round_trip(a in cell(), b in cell(), c in cell(), n in proptest::option::of(0usize..100)) {
        let row = Row {
            param1: a, param2: b, n_a: c, g2: a, g3: b, n_sigma: c, n_max: n, tail_mass: a,
            status: "ok".into(),
        };
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&row), &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), 1);
        prop_assert_eq!(back[0].n_a.map(f64::to_bits), row.n_a.map(f64::to_bits));
        prop_assert_eq!(&back[0].status, &row.status);
        prop_assert_eq!(back[0].n_max, row.n_max);
    }

    #[test]
    fn axis_grids(lo in 1e-3f64..10.0, span in 1.01f64..1e3, count in 2usize..200, log in any::<bool>()) {
        let axis = SweepAxis {
            param: Param::GammaA,
            scale: if log { Scale::Log } else { Scale::Linear },
            min: lo,
            max: lo * span,
            count,
        };
        let v = axis.values();
        prop_assert_eq!(v.len(), count);
        prop_assert_eq!(v[0], axis.min);
        prop_assert_eq!(v[count - 1], axis.max);
        prop_assert!(v.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn sweep_grids_are_row_major(n1 in 2usize..6, n2 in 2usize..6) {
        let text = format!(
            "sweep.param = P_sigma, gamma_a\nsweep.scale = linear, linear\nsweep.min = 1, 1\nsweep.max = 2, 2\nsweep.count = {n1}, {n2}\n"
        );
        let plan = parse_config_str(&text).unwrap().sweep.unwrap();
        let pts = plan.points();
        prop_assert_eq!(pts.len(), n1 * n2);
        for (k, p) in pts.iter().enumerate() {
            prop_assert_eq!(p.0, plan.axes[0].values()[k / n2]);
            prop_assert_eq!(p.1, Some(plan.axes[1].values()[k % n2]));
        }
    }
}
