#!/usr/bin/env python3
"""Write procedural mixture-prior templates as PNG files.

Usage:
  python scripts/generate_templates.py OUT_DIR [--count 8] [--height 64] [--width 64] [--seed 0]

The directory can then be passed to ``luminark sample --templates`` or used as
``template_dir`` in an experiment config.
"""
from __future__ import annotations

from pathlib import Path

import click

from luminark.core.image import save_png
from luminark.diffusion.templates import generate_templates


@click.command()
@click.argument("out_dir", type=click.Path(file_okay=False))
@click.option("--count", type=click.IntRange(min=1), default=8, show_default=True)
@click.option("--height", type=click.IntRange(min=1), default=64, show_default=True)
@click.option("--width", type=click.IntRange(min=1), default=64, show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
def main(out_dir: str, count: int, height: int, width: int, seed: int):
    out = Path(out_dir)
    for j, template in enumerate(generate_templates(count, height, width, seed)):
        save_png(template, out / f"template_{j:03d}.png")
    click.echo(f"Wrote {count} templates ({width}x{height}) to {out}")


if __name__ == "__main__":
    main()
