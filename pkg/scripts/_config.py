"""Expose a dataclass config as command-line flags."""
import argparse
import dataclasses


def parse(cls, argv=None, description=None):
    p = argparse.ArgumentParser(description=description)
    for f in dataclasses.fields(cls):
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        flag = "--" + f.name.replace("_", "-")
        if isinstance(default, bool):
            p.add_argument(flag, action=argparse.BooleanOptionalAction, default=default)
        elif isinstance(default, tuple):
            p.add_argument(flag, nargs=len(default), type=type(default[0]), default=default)
        else:
            p.add_argument(flag, type=type(default), default=default)
    ns = p.parse_args(argv)
    return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in vars(ns).items()})
