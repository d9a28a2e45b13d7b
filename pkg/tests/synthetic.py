"""Deterministic synthetic novels in the Project Gutenberg layout."""
import numpy as np

from narranet.network import to_roman

ORDINAL_WORDS = ["FIRST", "SECOND", "THIRD", "FOURTH", "FIFTH", "SIXTH", "SEVENTH", "EIGHTH",
                 "NINTH", "TENTH", "ELEVENTH", "TWELFTH", "THIRTEENTH", "FOURTEENTH", "FIFTEENTH"]
NAMES = ["Anna", "Boris", "Clara", "Dmitri", "Elena", "Fyodor", "Galina", "Hugo", "Irina", "Jakob"]
POSITIVE = ["happy", "love", "joyful", "delight", "smiled", "kindness", "hope"]
NEGATIVE = ["pain", "fear", "grief", "sorrow", "misery", "wept", "cruel"]
THEMES = [
    ["garden", "flower", "bench", "rose", "lilac"],
    ["barricade", "musket", "powder", "street", "cannon"],
    ["convent", "prayer", "chapel", "candle", "bell"],
    ["river", "boat", "bridge", "water", "fog"],
    ["court", "jury", "judge", "attorney", "verdict"],
]
FILLER = ["walked", "through", "city", "evening", "door", "window", "letter", "morning", "road"]


def make_novel(seed=0, n_volumes=2, books_per_volume=3, chapters_per_book=4, names=NAMES[:6],
               p_appear=0.35, empty_books=(), words_per_chapter=120):
    """Return ``(text, timelines, structure)`` for a random novel.

    ``structure`` lists ``(volume, book, chapter)`` per ordinal and ``timelines``
    maps every name to the ordinals it was written into.  Books listed in
    ``empty_books`` (1-based global book numbers) contain no character name.
    """
    rng = np.random.default_rng(seed)
    body, toc = [], []
    timelines = {n: [] for n in names}
    structure = []
    ordinal = 0
    book_no = 0
    for v in range(1, n_volumes + 1):
        head = f"VOLUME {to_roman(v)}\u2014PART {v}"
        toc.append(head)
        body.append(head + "\n\nSome words about this volume.\n")
        for b in range(1, books_per_volume + 1):
            book_no += 1
            head = f"BOOK {ORDINAL_WORDS[b - 1]}\u2014THE {ORDINAL_WORDS[b - 1].lower()} BOOK"
            toc.append(head)
            body.append(head + "\n")
            theme = THEMES[(book_no - 1) % len(THEMES)]
            for c in range(1, chapters_per_book + 1):
                ordinal += 1
                structure.append((v, b, c))
                head = f"CHAPTER {to_roman(c)}\u2014A CHAPTER"
                toc.append(head)
                present = []
                if book_no not in empty_books:
                    present = [n for n in names if rng.random() < p_appear]
                words = list(rng.choice(FILLER + theme * 2, size=words_per_chapter))
                mood = POSITIVE if rng.random() < 0.55 else NEGATIVE
                words += list(rng.choice(mood, size=int(rng.integers(2, 10))))
                words += list(rng.choice(POSITIVE + NEGATIVE, size=3))
                for n in present:
                    timelines[n].append(ordinal)
                    words += [n, n.upper(), n.lower()] if rng.random() < 0.2 else [n]
                    words += list(rng.choice(theme[:2], size=3))
                rng.shuffle(words)
                lines = [" ".join(words[i:i + 12]) + "." for i in range(0, len(words), 12)]
                body.append(head + "\n\n" + "\n".join(lines) + "\n")
    text = (
        "The Project Gutenberg eBook of a Synthetic Novel\n\nCONTENTS\n\n"
        + "\n".join(toc)
        + "\n\n\n"
        + "\n".join(body)
        + "\n*** END OF THE PROJECT GUTENBERG EBOOK ***\nLicence text mentioning Anna and Boris.\n"
    )
    return text, {k: v for k, v in timelines.items()}, structure
