#!/usr/bin/env python3

from coarsekit.cli import main

main()

"""
app.py

Main entrypoint for the coarsekit command line.

Instructions for developers:
- Run `python app.py <subcommand> ...`; `python app.py --help` lists the subcommands.
  • Inputs are JSON documents (see data/ for samples and README.md for the schemas).
  • Every run prints one JSON report on stdout; logs go to stderr.
- Add a subcommand by writing a `cmd_<name>(args, loader)` handler in coarsekit/cli.py,
  registering it in COMMANDS and declaring its flags in build_parser().
- Configuration is read from the environment or a local .env file (see .env.example):
  • COARSEKIT_EXACT_CAP bounds every exhaustive subset scan.
  • COARSEKIT_WORKERS sets the per-component thread pool size.
- Exit code 0 means a verdict was computed (negative ones included); 2 means bad input.
"""
