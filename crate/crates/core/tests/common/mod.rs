#![allow(dead_code)]

pub mod gen;
pub mod props;
pub mod trees;
