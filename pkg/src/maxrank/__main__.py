"""maxrank console entry point"""
import sys

from maxrank.cli.main import main as cli_main


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
