"""Entry point for ``python -m cli``."""
from cli.commands import cli

if __name__ == "__main__":
    cli(prog_name="optomech")
