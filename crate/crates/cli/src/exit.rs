//! Process exit codes. `2` is reserved for command-line usage errors.

use pdembed::Error;

pub const CHECKS_FAILED: u8 = 1;
pub const IO: u8 = 29;

pub fn code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => 3,
        Error::InvalidPoint { .. } => 4,
        Error::EmptyDiagram => 5,
        Error::ArityMismatch { .. } => 6,
        Error::ArityTooLarge { .. } => 7,
        Error::PadBelowArity { .. } => 8,
        Error::InvalidScale(_) => 9,
        Error::ScaleMismatch(..) => 10,
        Error::InvalidGridKey { .. } => 11,
        Error::WrongScheduleKind { .. } => 12,
        Error::InvalidSchedule(_) => 13,
        Error::InvalidTolerance(_) => 14,
        Error::TailNotReached(_) => 15,
        Error::NegativeArgument(_) => 16,
        Error::OutOfDomain { .. } => 17,
        Error::InvalidSpec(_) => 18,
        Error::OutsideFrame { .. } => 19,
        Error::CountOverflow => 20,
        Error::DenseTooLarge { .. } => 21,
        Error::WitnessUnavailable(_) => 22,
        Error::InvalidAnchors(_) => 23,
        Error::NotAnImage(_) => 24,
        Error::IllConditioned(_) => 25,
        Error::InvalidProbability(_) => 26,
        Error::UnknownCheck(_) => 27,
        Error::InvalidConfig(_) => 28,
    }
}
