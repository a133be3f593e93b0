// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(quditsynth_cli::run_cli(std::env::args_os()));
}
