//! Full pipeline runs over the synthetic fixture: plan invariants,
//! artifact shape, and byte-level determinism.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use chargeplan::config::PipelineConfig;
use chargeplan::fixture;
use chargeplan::pipeline::{self, BuildPlan, SiteSource};
use chargeplan::queueing::ChargerType;
use chargeplan::voronoi::REPAIR_HUB_MIN_PORTS;

fn run_fixture(seed: u64) -> (tempfile::TempDir, PipelineConfig, BuildPlan) {
    let dir = tempfile::tempdir().unwrap();
    let fixture = fixture::generate(seed).unwrap();
    let config_path = fixture::write(&fixture, dir.path()).unwrap();
    let config = PipelineConfig::load(&config_path, &[]).unwrap();
    let out = dir.path().join("out");
    let plan = pipeline::run(&config, &out, true).unwrap();
    (dir, config, plan)
}

#[test]
fn fixture_run_satisfies_plan_invariants() {
    let (_dir, config, plan) = run_fixture(42);

    assert!(!plan.sites.is_empty());
    let cap = config.queueing.utilisation_cap;
    for site in &plan.sites {
        assert!(
            site.plan.metrics.rho_eff <= cap + 1e-12,
            "site {} utilisation {} exceeds cap {cap}",
            site.site_id,
            site.plan.metrics.rho_eff
        );
        assert!(site.plan.c >= config.queueing.min_ports);
        assert!(site.activation_year >= 1);
        assert!(site.activation_year <= config.forecast.years);
        assert!(site.design_gross >= 0.0);
    }

    // The eastern strip has no roads, so the reachability repair must fire.
    let repair_hubs: Vec<_> = plan
        .sites
        .iter()
        .filter(|s| s.source == SiteSource::RepairHub)
        .collect();
    assert!(!repair_hubs.is_empty(), "expected at least one repair hub");
    for hub in &repair_hubs {
        assert!(hub.plan.c >= REPAIR_HUB_MIN_PORTS);
        assert_eq!(hub.plan.charger_type, ChargerType::Dcfc);
    }

    // Reachability postcondition from the repair loop.
    assert!(plan.reachability.violations.is_empty());
    assert!(plan.reachability.max_distance_m <= config.reachability.threshold_m);
    for a in &plan.reachability.assignments {
        assert!(a.distance_m <= config.reachability.threshold_m);
    }

    // Selection reached the configured coverage level.
    let alpha = config.mclp.alpha.unwrap();
    assert!(plan.coverage_fraction >= alpha);
    assert!(!plan.selection.is_empty());
    let last = plan.selection.last().unwrap();
    assert!((last.cumulative_fraction - plan.coverage_fraction).abs() < 1e-12);

    // Capital staging is an exact decomposition of the build cost.
    let total: f64 = plan.sites.iter().map(|s| s.plan.c_station).sum();
    let staged: f64 = plan.yearly_capital.iter().sum();
    assert!((total - staged).abs() < 1e-6 * total.max(1.0));
    assert_eq!(plan.yearly_capital.len(), config.forecast.years as usize);

    // Growing shares can only hold or raise the per-type port totals.
    for (charger, path) in &plan.capacity_path {
        assert_eq!(path.len(), config.forecast.years as usize);
        for pair in path.windows(2) {
            assert!(
                pair[0] <= pair[1],
                "{charger} ports shrank from {} to {}",
                pair[0],
                pair[1]
            );
        }
    }

    // Forecast rows cover every county and year, inside the envelope.
    let counties: BTreeSet<&str> = plan.forecast.iter().map(|r| r.county_id.as_str()).collect();
    assert_eq!(counties.len(), 2);
    assert_eq!(
        plan.forecast.len(),
        counties.len() * config.forecast.years as usize
    );
    for row in &plan.forecast {
        assert!(row.beta > 0.0 && row.beta <= 1.0);
        let cap = config.forecast.envelope[(row.year as usize - 1).min(config.forecast.envelope.len() - 1)];
        assert!(row.beta <= cap + 1e-12, "beta {} above cap {cap}", row.beta);
    }

    // The fixture envelope binds the larger county by the final year.
    let bound = plan
        .forecast
        .iter()
        .any(|r| (r.beta - config.forecast.envelope[(r.year - 1) as usize]).abs() < 1e-12);
    assert!(bound, "expected the penetration envelope to bind somewhere");

    // Coverage metrics exist for both radii and are proper fractions.
    assert_eq!(plan.coverage.len(), config.equity.radii_m.len());
    for c in &plan.coverage {
        assert!((0.0..=1.0).contains(&c.tile_coverage));
        assert!((0.0..=1.0).contains(&c.area_coverage));
    }
    assert!(plan.equity.low_income_mean_m.is_finite());
    assert!(plan.equity.gap_m.is_finite());

    // Zone recommendations point at real candidates.
    assert!(!plan.zone_best.is_empty());
    let site_ids: BTreeSet<u64> = plan.selection.iter().map(|r| r.site_id).collect();
    assert!(!site_ids.is_empty());
}

#[test]
fn fixture_run_writes_all_artifacts() {
    let (dir, _config, _plan) = run_fixture(42);
    let out = dir.path().join("out");
    for name in [
        "plan.geojson",
        "site_plans.csv",
        "selection.csv",
        "reachability.csv",
        "forecast.csv",
        "summary.json",
        "demand.csv",
        "centrality.csv",
        "candidates.csv",
        "parents.csv",
    ] {
        let path = out.join(name);
        assert!(path.exists(), "missing artifact {name}");
        assert!(fs::metadata(&path).unwrap().len() > 0, "empty artifact {name}");
    }

    // summary.json is valid JSON with the headline keys.
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    for key in [
        "capacity_path",
        "coverage",
        "coverage_fraction",
        "equity",
        "sites",
        "total_capital",
        "yearly_capital",
        "zone_best",
    ] {
        assert!(summary.get(key).is_some(), "summary.json missing {key}");
    }

    // plan.geojson is a feature collection with one feature per site.
    let geo: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("plan.geojson")).unwrap()).unwrap();
    assert_eq!(geo["type"], "FeatureCollection");
    let features = geo["features"].as_array().unwrap();
    assert!(!features.is_empty());
    for f in features {
        assert_eq!(f["geometry"]["type"], "Point");
        let props = &f["properties"];
        assert!(props["ports"].as_u64().unwrap() >= 1);
        assert!(props["activation_year"].as_u64().unwrap() >= 1);
        props["added_by_repair"].as_bool().unwrap();
    }
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    entries.sort();
    entries
}

#[test]
fn fixture_run_is_deterministic() {
    let (dir_a, _config_a, _plan_a) = run_fixture(42);
    let (dir_b, _config_b, _plan_b) = run_fixture(42);
    let a = snapshot(&dir_a.path().join("out"));
    let b = snapshot(&dir_b.path().join("out"));
    assert_eq!(a.len(), b.len());
    for ((name_a, bytes_a), (name_b, bytes_b)) in a.iter().zip(&b) {
        assert_eq!(name_a, name_b);
        assert_eq!(bytes_a, bytes_b, "artifact {name_a} differs between runs");
    }
}

#[test]
fn fixture_seed_changes_the_plan() {
    let (_dir_a, _config_a, plan_a) = run_fixture(42);
    let (_dir_b, _config_b, plan_b) = run_fixture(43);
    let ids_a: Vec<u64> = plan_a.selection.iter().map(|r| r.site_id).collect();
    let ids_b: Vec<u64> = plan_b.selection.iter().map(|r| r.site_id).collect();
    let totals = (plan_a.total_demand, plan_b.total_demand);
    assert!(
        ids_a != ids_b || totals.0 != totals.1,
        "independent seeds produced identical plans"
    );
}

#[test]
fn validation_rejects_broken_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = fixture::generate(42).unwrap();
    let config_path = fixture::write(&fixture, dir.path()).unwrap();

    // Corrupt one cell row: ev_share far outside [0, 1].
    let cells_path = dir.path().join("cells.csv");
    let cells = fs::read_to_string(&cells_path).unwrap();
    let mut lines: Vec<&str> = cells.lines().collect();
    let broken = lines[1].to_string();
    let mut fields: Vec<&str> = broken.split(',').collect();
    fields[8] = "3.5";
    let replacement = fields.join(",");
    lines[1] = &replacement;
    fs::write(&cells_path, lines.join("\n") + "\n").unwrap();

    let config = PipelineConfig::load(&config_path, &[]).unwrap();
    let inputs = pipeline::load_inputs(&config).unwrap();
    let report = pipeline::validate_inputs(&config, &inputs);
    assert!(report.has_fatal());
    let text = report.to_string();
    assert!(text.contains("ev_share"), "report should name the bad column: {text}");
    assert!(text.contains("cells.csv:2"), "report should cite the line: {text}");

    let err = pipeline::run(&config, &dir.path().join("out"), false).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn missing_traffic_rows_are_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = fixture::generate(42).unwrap();
    let config_path = fixture::write(&fixture, dir.path()).unwrap();

    let traffic_path = dir.path().join("traffic.csv");
    let traffic = fs::read_to_string(&traffic_path).unwrap();
    let mut lines: Vec<&str> = traffic.lines().collect();
    lines.remove(1);
    fs::write(&traffic_path, lines.join("\n") + "\n").unwrap();

    let config = PipelineConfig::load(&config_path, &[]).unwrap();
    let inputs = pipeline::load_inputs(&config).unwrap();
    let report = pipeline::validate_inputs(&config, &inputs);
    assert!(report.has_fatal());
    assert!(report.to_string().contains("no traffic row"));
}

#[test]
fn clean_fixture_validates_without_fatals() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = fixture::generate(42).unwrap();
    let config_path = fixture::write(&fixture, dir.path()).unwrap();
    let config = PipelineConfig::load(&config_path, &[]).unwrap();
    let inputs = pipeline::load_inputs(&config).unwrap();
    let report = pipeline::validate_inputs(&config, &inputs);
    assert!(!report.has_fatal(), "unexpected fatals:\n{report}");
}
