//! Shared fixtures for the benchmark targets.

use cantilever_core::grid::{Grid, QuadratureConfig};
use cantilever_core::nonlinearity::{parse_spec, NonlinearitySpec};

pub fn ramp_spec() -> NonlinearitySpec {
    parse_spec("[0,0.03): 4600*u ; [0.03,inf): 138").unwrap()
}

pub fn power_spec() -> NonlinearitySpec {
    parse_spec("[0,1): 0.5*u^0.5 ; [1,5): 0.5*u^2 ; [5,inf): 0.5*((u-5)^0.5 + 25)").unwrap()
}

pub fn grid() -> Grid {
    Grid::uniform(256).unwrap()
}

pub fn quad() -> QuadratureConfig {
    QuadratureConfig::default()
}
