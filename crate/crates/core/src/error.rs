use thiserror::Error;

use crate::bessel::BesselError;
use crate::bifurcation::BifurcationError;
use crate::discrete::DiscreteError;
use crate::disk2d::DiskError;
use crate::jost::JostError;
use crate::lapnorm::LapError;
use crate::numerics::NumericsError;
use crate::potentials::PotentialError;
use crate::resolvent::ResolventError;

/// Any error raised by the library, tagged with the module it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Jost(#[from] JostError),
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error(transparent)]
    Disk(#[from] DiskError),
    #[error(transparent)]
    Resolvent(#[from] ResolventError),
    #[error(transparent)]
    Lap(#[from] LapError),
    #[error(transparent)]
    Bifurcation(#[from] BifurcationError),
    #[error(transparent)]
    Discrete(#[from] DiscreteError),
}

impl Error {
    pub fn module(&self) -> &'static str {
        match self {
            Error::Numerics(_) => "NumericsError",
            Error::Potential(_) => "PotentialError",
            Error::Jost(_) => "JostError",
            Error::Bessel(_) => "BesselError",
            Error::Disk(_) => "DiskError",
            Error::Resolvent(_) => "ResolventError",
            Error::Lap(_) => "LapError",
            Error::Bifurcation(_) => "BifurcationError",
            Error::Discrete(_) => "DiscreteError",
        }
    }
}
