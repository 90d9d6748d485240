#!/usr/bin/env python3
"""Fetch and prepare the FilmTrust ratings corpus.

Run this on a machine with internet access; sandboxed environments
without outbound network can copy the produced ``data/filmtrust.csv``
into the repository (or point VARCF_FILMTRUST at it) to enable the
dataset-dependent tests and demos.

FilmTrust ships as a space-separated ``ratings.txt`` (user item rating);
this script converts it to the comma-separated layout the loader reads.

MovieLens 1M (for the slow reproduction test) is prepared analogously:
download ml-1m.zip from grouplens.org and convert ratings.dat with

    python -c "import pathlib; pathlib.Path('data/movielens.csv').write_text(
        pathlib.Path('ml-1m/ratings.dat').read_text().replace('::', ','))"
"""

import io
import sys
import urllib.request
import zipfile
from pathlib import Path

# mirrors that have carried the corpus; tried in order
URLS = (
    "https://guoguibing.github.io/librec/datasets/filmtrust.zip",
    "https://www.librec.net/datasets/filmtrust.zip",
)

EXPECTED = {"users": 1508, "items": 2071, "ratings": 35494}


def download() -> bytes:
    last_error = None
    for url in URLS:
        try:
            print(f"downloading {url} ...")
            with urllib.request.urlopen(url, timeout=60) as response:
                return response.read()
        except OSError as exc:
            last_error = exc
            print(f"  failed: {exc}")
    raise SystemExit(f"could not download FilmTrust from any mirror: {last_error}")


def convert(raw: bytes, out_path: Path) -> None:
    with zipfile.ZipFile(io.BytesIO(raw)) as archive:
        name = next(n for n in archive.namelist() if n.endswith("ratings.txt"))
        text = archive.read(name).decode("utf-8")
    users, items, count = set(), set(), 0
    lines = []
    for line in text.splitlines():
        if not line.strip():
            continue
        user, item, rating = line.split()
        users.add(user)
        items.add(item)
        count += 1
        lines.append(f"{user},{item},{rating}")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    got = {"users": len(users), "items": len(items), "ratings": count}
    status = "OK" if got == EXPECTED else f"MISMATCH (expected {EXPECTED})"
    print(f"wrote {out_path}: {got} {status}")


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/filmtrust.csv")
    convert(download(), out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
