use pipecrawler::output::{write_records_csv, write_records_json};
use pipecrawler::{format_sig, parse_scenario_str, ScenarioFile, RECORD_COLUMNS};
use pipecrawler_core::simulator::SimRecord;
use pipecrawler_core::{
    DimensionTable, PipeNetwork, RobotParams, Scenario, SegmentSpec, StartPose, TransmissionConfig,
};
use proptest::prelude::*;

fn segment() -> impl Strategy<Value = SegmentSpec> {
    prop_oneof![
        (1.0f64..2000.0).prop_map(SegmentSpec::straight),
        (120.0f64..900.0, 1.0f64..180.0, -180.0f64..180.0).prop_map(|(r, sw, roll)| SegmentSpec::bend(r, sw, roll)),
    ]
}

prop_compose! {
    fn scenario()(
        segs in prop::collection::vec(segment(), 1..6),
        inner in 60.0f64..110.0,
        h in 20.0f64..60.0,
        rs in 5.0f64..40.0,
        theta in -360.0f64..360.0,
        k in 100.0f64..5000.0,
        springs in 1u32..24,
        preload in 0.0f64..10.0,
        extra in 0.0f64..5.0,
        mass in 1.0f64..50.0,
        mu in 0.05f64..1.5,
        length in 50.0f64..400.0,
        asym in 1.0f64..30.0,
        g in (0.1f64..5.0, 0.1f64..5.0, 0.5f64..1.0),
        w in 0.0f64..10.0,
        c in 1.0f64..1e6,
        drag in 0.0f64..0.1,
        dt in 0.001f64..0.1,
        max_time in 0.0f64..500.0,
        tol in 1e-14f64..1e-6,
    ) -> Scenario {
        let network = PipeNetwork::build(&segs, inner, StartPose::default()).unwrap();
        let robot = RobotParams {
            contact_radius_mm: h,
            sprocket_radius_mm: rs,
            orientation_deg: theta,
            spring_k_n_per_m: k,
            springs_per_robot: springs,
            preload_mm: preload,
            max_compression_mm: 16.0,
            max_asym_deg: asym,
            mass_kg: mass,
            mu,
            robot_length_mm: length,
            bend_extra_compression_mm: extra,
        };
        let mut sc = Scenario::new(network, robot, TransmissionConfig::new(g.0, g.1, g.2).unwrap(), w, max_time);
        sc.slip_stiffness = c;
        sc.track_drag = drag;
        sc.dt = dt;
        sc.solver.tol = tol;
        sc
    }
}

fn record() -> impl Strategy<Value = SimRecord> {
    let v = || -1e6f64..1e6;
    (0.0f64..1e4, 0.0f64..1e5, 0usize..50, [v(), v(), v()], [v(), v(), v()], [v(), v(), v()], [v(), v(), v()], v())
        .prop_map(|(t, s, segment_index, track_speeds, required_speeds, slip, compressions, common_torque)| SimRecord {
            t,
            s,
            segment_index,
            track_speeds,
            required_speeds,
            slip,
            compressions,
            common_torque,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonical_scenario_round_trips(sc in scenario()) {
        let text = ScenarioFile::from_scenario(&sc).to_json();
        let back = parse_scenario_str(&text).unwrap();
        prop_assert_eq!(&back, &sc);
        prop_assert_eq!(ScenarioFile::from_scenario(&back).to_json(), text);
    }

    #[test]
    fn csv_shape_matches_records(records in prop::collection::vec(record(), 0..20)) {
        let mut buf = Vec::new();
        write_records_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        prop_assert_eq!(lines.len(), records.len() + 1);
        for (line, r) in lines.iter().skip(1).zip(&records) {
            let fields: Vec<&str> = line.split(',').collect();
            prop_assert_eq!(fields.len(), RECORD_COLUMNS.len());
            let t: f64 = fields[0].parse().unwrap();
            prop_assert!((t - r.t).abs() <= 5e-9 * r.t.abs());
            let torque: f64 = fields[15].parse().unwrap();
            prop_assert!((torque - r.common_torque).abs() <= 5e-9 * r.common_torque.abs());
        }
    }

    #[test]
    fn json_mirrors_csv(records in prop::collection::vec(record(), 0..10)) {
        let mut csv_buf = Vec::new();
        write_records_csv(&records, &mut csv_buf).unwrap();
        let mut json_buf = Vec::new();
        write_records_json(&records, &mut json_buf).unwrap();
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = serde_json::from_slice(&json_buf).unwrap();
        let text = String::from_utf8(csv_buf).unwrap();
        prop_assert_eq!(rows.len(), records.len());
        for (row, line) in rows.iter().zip(text.lines().skip(1)) {
            for (name, field) in RECORD_COLUMNS.iter().zip(line.split(',')) {
                let json = row[*name].as_f64().unwrap();
                prop_assert_eq!(json, field.parse::<f64>().unwrap(), "{}", name);
            }
        }
    }

    #[test]
    fn nine_significant_digits(x in prop::num::f64::NORMAL) {
        let text = format_sig(x, 9);
        let back: f64 = text.parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-9 * x.abs());
        let digits = text.split('e').next().unwrap().chars().filter(char::is_ascii_digit).collect::<String>();
        prop_assert!(digits.trim_start_matches('0').len() <= 9, "{}", text);
    }
}

#[test]
fn three_records_give_four_lines() {
    let r = SimRecord {
        t: 0.0,
        s: 0.0,
        segment_index: 0,
        track_speeds: [50.0; 3],
        required_speeds: [50.0; 3],
        slip: [0.0; 3],
        compressions: [8.0; 3],
        common_torque: 0.0128,
    };
    let mut buf = Vec::new();
    write_records_csv(&[r, r, r], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
}

#[test]
fn nominal_size_resolves_like_the_table() {
    let text = r#"{
        "pipe": { "nps": "2", "schedule": "40", "segments": [ { "kind": "straight", "length_mm": 100 } ] },
        "robot": { "h_mm": 20, "sprocket_radius_mm": 10, "spring_k_n_per_m": 1000, "preload_mm": 5,
                   "mass_kg": 3, "mu": 0.3, "robot_length_mm": 80 },
        "transmission": { "g1": 1, "g2": 1 },
        "sim": { "input_speed_rad_s": 1, "max_time_s": 10 }
    }"#;
    let sc = parse_scenario_str(text).unwrap();
    let dims = DimensionTable::builtin().lookup("2", "40").unwrap().inner_radius_mm();
    assert_eq!(sc.network.inner_radius(), dims);
    assert!((2.0 * dims - 52.50).abs() < 0.01);
}
