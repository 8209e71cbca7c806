pub mod bench;
pub mod deblur;
pub mod demo1d;
pub mod synth;
