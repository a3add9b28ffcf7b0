//! Specs bundled into the binary; addressable as `fixture:<name>`.

pub const NAMES: &[&str] = &[
    "five_lines",
    "router_n4_k2",
    "moe_n4_k2_h2",
    "moe_top1_n3",
    "zonotope_hexagon",
    "segment_d2",
    "circle_d2",
    "hemisphere_d3",
];

pub fn get(name: &str) -> Option<&'static str> {
    Some(match name {
        "five_lines" => include_str!("../../../fixtures/five_lines.json"),
        "router_n4_k2" => include_str!("../../../fixtures/router_n4_k2.json"),
        "moe_n4_k2_h2" => include_str!("../../../fixtures/moe_n4_k2_h2.json"),
        "moe_top1_n3" => include_str!("../../../fixtures/moe_top1_n3.json"),
        "zonotope_hexagon" => include_str!("../../../fixtures/zonotope_hexagon.json"),
        "segment_d2" => include_str!("../../../fixtures/segment_d2.json"),
        "circle_d2" => include_str!("../../../fixtures/circle_d2.json"),
        "hemisphere_d3" => include_str!("../../../fixtures/hemisphere_d3.json"),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tropcap_core::{ExpertSpec, ManifoldSpec, MoESpec, RouterSpec, Zonotope};

    #[test]
    fn every_fixture_parses_as_its_type() {
        for name in NAMES {
            let text = get(name).unwrap();
            let ok = match *name {
                "five_lines" => serde_json::from_str::<ExpertSpec>(text).is_ok(),
                "router_n4_k2" => serde_json::from_str::<RouterSpec>(text).is_ok(),
                "zonotope_hexagon" => serde_json::from_str::<Zonotope>(text).is_ok(),
                n if n.starts_with("moe") => serde_json::from_str::<MoESpec>(text).is_ok(),
                _ => serde_json::from_str::<ManifoldSpec>(text).is_ok(),
            };
            assert!(ok, "{name}");
        }
        assert!(get("missing").is_none());
    }

    #[test]
    fn shipped_schemas_are_json() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas");
        let mut n = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
            let v: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert!(v.get("$schema").is_some());
            n += 1;
        }
        assert_eq!(n, 9);
    }
}
