pub mod rat;
pub mod ratlp;
pub mod discretize;
pub mod matrices;
pub mod reduce;
pub mod molp;
pub mod cutplane;
pub mod sampler;
pub mod closedform;
pub mod cases;
pub mod cli;
