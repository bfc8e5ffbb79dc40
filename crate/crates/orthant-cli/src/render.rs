//! SVG raster rendering of clusters, closures, and boundary paths.
//!
//! One rectangle per member site per layer, drawn in declared order over a
//! background rectangle. Output bytes are a pure function of the inputs, so
//! renders can be golden-tested.

use orthant_core::{Region, Site, SiteSet};
use std::fmt::Write;

/// A drawable layer: a name, a fill color, and its sites.
pub struct Layer {
    pub name: &'static str,
    pub color: &'static str,
    pub sites: Vec<Site>,
}

impl Layer {
    pub fn from_set(name: &'static str, color: &'static str, set: &SiteSet) -> Layer {
        Layer {
            name,
            color,
            sites: set.iter().collect(),
        }
    }
}

/// Geometry of a render: pixel size per lattice cell.
#[derive(Clone, Copy, Debug)]
pub struct RenderSpec {
    pub cell: u32,
    pub background: &'static str,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            cell: 3,
            background: "#ffffff",
        }
    }
}

/// Render layers over a region; `y` grows upward on the lattice so rows are
/// flipped into SVG's downward axis.
pub fn render_svg(region: Region, layers: &[Layer], spec: RenderSpec) -> String {
    let c = spec.cell as i64;
    let width = region.width() * c;
    let height = region.height() * c;
    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    )
    .unwrap();
    writeln!(
        out,
        "  <rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"{}\"/>",
        spec.background
    )
    .unwrap();
    for layer in layers {
        writeln!(out, "  <g id=\"{}\" fill=\"{}\">", layer.name, layer.color).unwrap();
        for s in &layer.sites {
            let x = (s.x - region.xmin) * c;
            let y = (region.ymax - s.y) * c;
            writeln!(
                out,
                "    <rect x=\"{x}\" y=\"{y}\" width=\"{c}\" height=\"{c}\"/>"
            )
            .unwrap();
        }
        writeln!(out, "  </g>").unwrap();
    }
    out.push_str("</svg>\n");
    out
}
