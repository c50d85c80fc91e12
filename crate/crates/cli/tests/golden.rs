use std::path::PathBuf;

use jagg::plot::render_hysteresis;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn hysteresis_plot_matches_golden_file() {
    let window = Some((0.90125, 1.095));
    let svg = render_hysteresis(&fixture("scan.csv"), window).unwrap();
    if std::env::var_os("JAGG_UPDATE_GOLDEN").is_some() {
        std::fs::write(fixture("hysteresis.svg"), &svg).unwrap();
    }
    let golden = std::fs::read_to_string(fixture("hysteresis.svg")).unwrap();
    assert_eq!(svg, golden);
    assert!(svg.contains("bistable"));
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn hysteresis_plot_is_byte_stable() {
    let a = render_hysteresis(&fixture("scan.csv"), None).unwrap();
    let b = render_hysteresis(&fixture("scan.csv"), None).unwrap();
    assert_eq!(a, b);
    assert!(!a.contains("bistable"));
}
