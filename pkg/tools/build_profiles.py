"""Regenerate the bundled trigram profiles from the ``langdetect`` distribution.

Only needed when refreshing ``src/onionscope/data/profiles``; the package never
imports langdetect at runtime.
"""
import json
import os
import sys

import langdetect

LANGS = {"en": "en", "de": "de", "fr": "fr", "it": "it", "es": "es", "ru": "ru",
         "pt": "pt", "nl": "nl", "zh": "zh-cn", "tr": "tr"}
TOP = 300


def main(out_dir):
    src = os.path.join(os.path.dirname(langdetect.__file__), "profiles")
    os.makedirs(out_dir, exist_ok=True)
    for code, name in LANGS.items():
        with open(os.path.join(src, name), encoding="utf-8") as fh:
            prof = json.load(fh)
        grams = [(n, g) for g, n in prof["freq"].items() if len(g) == 3]
        grams.sort(key=lambda x: (-x[0], x[1]))
        total = prof["n_words"][2]
        with open(os.path.join(out_dir, f"{code}.txt"), "w", encoding="utf-8") as fh:
            fh.write(f"#total\t{total}\n")
            for n, g in grams[:TOP]:
                fh.write(f"{g}\t{n}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/onionscope/data/profiles")
