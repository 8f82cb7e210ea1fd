"""
CLI package
Command-line entry point (python -m cli <subcommand>)
"""
