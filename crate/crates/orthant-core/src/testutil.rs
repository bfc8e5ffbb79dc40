//! Helpers shared by unit and integration tests.

use crate::env::{EnvSet, EnvironmentWindow, ModelDescriptor, Provenance};
use crate::geom::Region;

/// Build a window from rows written top-down, for readable fixtures.
///
/// Cell glyphs: `N` = NE, `S` = SW, `.` = empty, `R`/`L`/`U`/`D` singletons,
/// `W` = SWE, `V` = UD, `H` = LR.
pub fn explicit_window(region: Region, rows_top_down: &[&str]) -> EnvironmentWindow {
    assert_eq!(rows_top_down.len() as i64, region.height(), "row count");
    let mut sets = Vec::with_capacity(region.area());
    for row in rows_top_down.iter().rev() {
        assert_eq!(row.chars().count() as i64, region.width(), "row width");
        for c in row.chars() {
            sets.push(match c {
                'N' => EnvSet::NE,
                'S' => EnvSet::SW,
                '.' => EnvSet::EMPTY,
                'R' => EnvSet::parse("R").unwrap(),
                'L' => EnvSet::parse("L").unwrap(),
                'U' => EnvSet::parse("U").unwrap(),
                'D' => EnvSet::parse("D").unwrap(),
                'W' => EnvSet::SWE,
                'V' => EnvSet::UD,
                'H' => EnvSet::LR,
                _ => panic!("unknown cell glyph {c:?}"),
            });
        }
    }
    EnvironmentWindow::from_cells(
        region,
        &sets,
        Provenance {
            model: ModelDescriptor::Custom(vec![]),
            p_text: String::new(),
            seed: 0,
        },
    )
}
