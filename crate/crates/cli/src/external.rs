//! Objectives evaluated by a child process.
//!
//! Wire protocol, one exchange per evaluation: the runner writes
//! `{"x":[v0,...,v{d-1}]}` and a newline to the child's stdin, and the child
//! answers with one line holding a decimal float. The child lives for the
//! whole run and is killed when the objective is dropped.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use warpbo::driver::{Objective, ObjectiveError};

use crate::config::Command;

pub struct ExternalObjective {
    child: Child,
    stdin: Option<ChildStdin>,
    replies: Receiver<std::io::Result<String>>,
    timeout: Duration,
    label: String,
}

impl ExternalObjective {
    pub fn spawn(command: &Command, timeout: Duration) -> Result<Self, ObjectiveError> {
        let (mut cmd, label) = match command {
            Command::Shell(s) => {
                let mut c = std::process::Command::new("sh");
                c.arg("-c").arg(s);
                (c, s.clone())
            }
            Command::Argv(argv) => {
                let (prog, args) = argv
                    .split_first()
                    .ok_or_else(|| ObjectiveError("empty external command".into()))?;
                let mut c = std::process::Command::new(prog);
                c.args(args);
                (c, argv.join(" "))
            }
        };
        let mut child = cmd
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| ObjectiveError(format!("cannot start `{label}`: {e}")))?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, replies) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(Self {
            child,
            stdin,
            replies,
            timeout,
            label,
        })
    }

    fn fail(&mut self, message: String) -> ObjectiveError {
        let _ = self.child.kill();
        ObjectiveError(format!("`{}`: {message}", self.label))
    }
}

impl Objective for ExternalObjective {
    fn evaluate(&mut self, x: &[f64]) -> Result<f64, ObjectiveError> {
        let request = serde_json::json!({ "x": x }).to_string();
        let sent = match self.stdin.as_mut() {
            Some(pipe) => writeln!(pipe, "{request}").and_then(|_| pipe.flush()),
            None => return Err(self.fail("child is no longer running".into())),
        };
        if let Err(e) = sent {
            self.stdin = None;
            return Err(self.fail(format!("child exited or closed its input ({e})")));
        }
        let reply = match self.replies.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(self.fail(format!("cannot read reply: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                return Err(self.fail(format!("no reply within {:?}", self.timeout)));
            }
            Err(RecvTimeoutError::Disconnected) => {
                let status = self.child.wait().map(|s| s.to_string()).unwrap_or_default();
                return Err(self.fail(format!("child exited before replying ({status})")));
            }
        };
        match reply.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.fail(format!("reply `{}` is not a finite number", reply.trim()))),
        }
    }
}

impl Drop for ExternalObjective {
    fn drop(&mut self) {
        self.stdin = None;
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
