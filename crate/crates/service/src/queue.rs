use std::collections::VecDeque;

use crate::protocol::{AudioFrame, ServerMessage};

#[derive(Debug, Clone, PartialEq)]
pub enum Outgoing {
    Frame(AudioFrame),
    Message(ServerMessage),
}

/// Stream traffic waiting for a slow client. Holds at most `capacity`
/// audio frames; beyond that the oldest entries go, and the next frame
/// handed out is preceded by a gap notice.
#[derive(Debug)]
pub struct FrameQueue {
    entries: VecDeque<Outgoing>,
    frames: usize,
    capacity: usize,
    gap: Option<(u64, u64)>,
}

impl FrameQueue {
    pub fn new(capacity: usize) -> Self {
        Self { entries: VecDeque::new(), frames: 0, capacity: capacity.max(1), gap: None }
    }

    /// Frames covering `seconds` of audio at `sample_rate`.
    pub fn for_duration(seconds: f64, sample_rate: u32, block: usize) -> Self {
        Self::new((seconds * sample_rate as f64 / block as f64).ceil() as usize)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, item: Outgoing) {
        if matches!(item, Outgoing::Frame(_)) {
            self.frames += 1;
        }
        self.entries.push_back(item);
        while self.frames > self.capacity {
            match self.entries.pop_front() {
                Some(Outgoing::Frame(f)) => {
                    self.frames -= 1;
                    self.gap = Some(match self.gap {
                        Some((first, count)) => (first, count + 1),
                        None => (f.sequence, 1),
                    });
                }
                Some(Outgoing::Message(_)) => {}
                None => break,
            }
            // Telemetry describing dropped audio goes with it.
            while matches!(self.entries.front(), Some(Outgoing::Message(_))) {
                self.entries.pop_front();
            }
        }
    }

    pub fn pop(&mut self) -> Option<Outgoing> {
        if let Some((first, count)) = self.gap.take() {
            return Some(Outgoing::Message(ServerMessage::Gap { first, count }));
        }
        let item = self.entries.pop_front()?;
        if matches!(item, Outgoing::Frame(_)) {
            self.frames -= 1;
        }
        Some(item)
    }
}
