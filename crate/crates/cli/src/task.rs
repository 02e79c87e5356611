use std::fmt;

use churnforge::features::{Population, Task};
use churnforge::telco::{Segment, ServiceType};

/// Whether predictions list the most likely or the least likely positives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Highest scores first.
    Likely,
    /// Lowest churn scores first ("most loyal").
    Loyal,
}

/// One of the seven prediction problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TaskSpec {
    pub id: u8,
    pub population: Population,
    pub task: Task,
    pub direction: Direction,
}

impl TaskSpec {
    pub fn new(id: u8) -> Option<Self> {
        let consumer = Population {
            segment: Some(Segment::Consumer),
            service_type: None,
        };
        let sme_voice = Population {
            segment: Some(Segment::Sme),
            service_type: Some(ServiceType::Voice),
        };
        let sme_both = Population {
            segment: Some(Segment::Sme),
            service_type: Some(ServiceType::VoiceBroadband),
        };
        let (population, task, direction) = match id {
            1 => (consumer, Task::Churn, Direction::Likely),
            2 => (consumer, Task::Churn, Direction::Loyal),
            3 => (consumer, Task::Winback, Direction::Likely),
            4 => (sme_voice, Task::Churn, Direction::Likely),
            5 => (sme_voice, Task::Churn, Direction::Loyal),
            6 => (sme_both, Task::Churn, Direction::Likely),
            7 => (sme_both, Task::Churn, Direction::Loyal),
            _ => return None,
        };
        Some(Self {
            id,
            population,
            task,
            direction,
        })
    }

    pub fn description(&self) -> &'static str {
        match self.id {
            1 => "consumer churners",
            2 => "most loyal consumers",
            3 => "consumer win-backs",
            4 => "SME voice churners",
            5 => "most loyal SME voice customers",
            6 => "SME voice and broadband churners",
            _ => "most loyal SME voice and broadband customers",
        }
    }
}

impl fmt::Display for TaskSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "problem {} ({})", self.id, self.description())
    }
}
