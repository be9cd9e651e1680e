"""
CLI - Command Line Front End

argparse commands printing report-1 documents.
"""

from .main import build_parser, main

__all__ = ['build_parser', 'main']
