from hhx.cli.main import build_parser, main
