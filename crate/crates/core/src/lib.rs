//! IED risk assessment for logistics routes.
//!
//! A regional logistic model ([`logit`]) and a link's crossing history
//! ([`adversary`]) are fused into a per-link attack probability ([`fusion`]),
//! which drives route choice by expected utility ([`decision`],
//! [`sequential`]).

pub mod adversary;
pub mod decision;
pub mod fixtures;
pub mod fusion;
pub mod induced;
pub mod ingest;
pub mod logit;
pub mod netmodel;
pub mod pipeline;
pub mod reproduce;
pub mod sequential;
