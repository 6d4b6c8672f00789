"""Synthetic tweets with planted drug mentions, misspellings and distractors.

Every tweet is drawn from one of a handful of categories, and the category
fixes its true label:

========================  =====  =============================================
category                  label  content
========================  =====  =============================================
``drug``                  1      correctly spelled lexicon drug in a use context
``drug_misspelled``       1      the same, with a distance-1 or -2 misspelling
``drug_unlisted``         1      a drug that the lexicon does not list
``drug_ambiguous``        1      a homograph drug name used as a drug
``homograph``             0      a homograph drug name used in its other sense
``pattern_negative``      0      drug-like phrasing without a drug ("took a nap")
``medical``               0      symptoms, doctors, metaphorical "overdose"
``medical_frame``         0      drug-use phrasing around a non-drug ("need some rest")
``general``               0      everyday chatter
``chatter``               0      loose word sequences over the non-drug vocabulary
========================  =====  =============================================

Word vectors are clustered by topic (drug, medical, music, food, ...), so a
model trained on them can generalize from listed to unlisted drug names.
Misspellings are out of vocabulary and only reachable through characters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .models.embeddings import EmbeddingTable
from .prefilter.lexicon import Lexicon
from .prefilter.patterns import PatternSet
from .textcore import Corpus, LabeledTweet, Tweet

LEXICON_DRUGS = (
    "xanax", "benadryl", "nyquil", "advil", "tylenol", "ibuprofen", "zoloft", "prozac",
    "melatonin", "claritin", "zyrtec", "adderall", "motrin", "aleve", "percocet", "vicodin",
    "valium", "ambien", "lexapro", "wellbutrin", "gabapentin", "naproxen", "amoxicillin",
    "omeprazole", "dayquil", "sudafed", "mucinex", "excedrin",
)
# listed in the lexicon but absent from the embedding vocabulary, like the long
# tail of real drug names
RARE_DRUGS = (
    "zolpidem", "sertraline", "citalopram", "trazodone", "lorazepam", "clonazepam",
    "diazepam", "hydrocodone", "oxycodone", "cetirizine", "loratadine", "fexofenadine",
    "promethazine", "cyclobenzaprine", "meloxicam", "prednisone", "metformin", "lisinopril",
    "atorvastatin", "fluoxetine", "escitalopram", "bupropion", "venlafaxine", "duloxetine",
    "quetiapine", "aripiprazole", "lamotrigine", "topiramate", "sumatriptan", "ondansetron",
)
HOMOGRAPHS = ("lyrica", "halls", "airborne", "ensure")
# everyday remedies that are not drugs; none of them has a word vector
NON_DRUG_FILLERS = ("bath", "yoga", "oatmeal", "smoothie", "broth", "naps", "blanket",
                    "massage", "popsicle", "ginger", "lemonade", "pillow", "stretching",
                    "heating pad", "hot shower", "chicken soup")
UNLISTED_DRUGS = ("prempro", "bactine", "robitussin", "tramadol", "klonopin", "midol")
SEED_NAMES = ("xanax", "benadryl", "advil", "tylenol", "nyquil", "zoloft", "ibuprofen", "melatonin")

SYMPTOMS = ("headache", "migraine", "cold", "flu", "cough", "cramps", "anxiety", "fever",
            "allergies", "back pain", "insomnia", "sore throat", "nausea", "toothache")
MEDICAL = ("doctor", "pharmacy", "prescription", "pills", "dose", "tablets", "symptoms",
           "clinic", "nurse", "sick", "overdose", "meds", "hospital", "appointment")
FEELINGS = ("better", "sleepy", "great", "weird", "dizzy", "calm", "so tired", "amazing")
AMOUNTS = ("a", "two", "some", "my", "three", "an extra")
GENERAL_NOUNS = ("game", "movie", "party", "dinner", "weekend", "coffee", "pizza", "beach",
                 "concert", "class", "homework", "traffic", "weather", "puppy", "shopping",
                 "gym", "nap", "shower", "milk", "burger", "team", "book", "car", "phone")
GENERAL_ADJ = ("amazing", "boring", "crazy", "awesome", "terrible", "perfect", "funny",
               "cold", "hot", "long", "cute", "loud")
PEOPLE = ("mom", "my sister", "the kids", "my husband", "bestie", "dad", "grandma", "the baby")
TIMES = ("today", "tonight", "tomorrow", "this morning", "all day", "right now", "later")
MUSIC = ("song", "album", "video", "concert", "voice", "music", "show")
FOOD = ("chocolate", "pizza", "candy", "coffee", "cookies", "sugar", "netflix", "memes")

TEMPLATES = {
    "drug": (
        "i took {amount} {drug} for my {symptom}",
        "{drug} is my best friend right now",
        "need some {drug} for this {symptom} asap",
        "my doctor gave me {drug} and i feel {feeling}",
        "just took {amount} {drug} gonna sleep {time}",
        "ran out of {drug} again {time}",
        "is it safe to mix {drug} and {drug2}",
        "the {drug} is finally kicking in",
        "cant sleep without my {drug}",
        "<user> try {drug} it helps with the {symptom}",
        "pharmacy was out of {drug} ugh my {symptom}",
        "{drug} and tea for this {symptom}",
    ),
    "homograph": {
        "lyrica": ("lyrica anderson new {music} is fire", "listening to lyrica all day",
                   "i actually really like lyrica", "lyrica was on the {music} {time}"),
        "halls": ("the halls were empty {time}", "walking the halls of school with {person}",
                  "decorating the halls for the {noun}", "halls of fame {time}"),
        "airborne": ("finally airborne going home {time}", "our flight is airborne",
                     "the kite got airborne at the {noun}", "airborne and ready for the {noun}"),
        "ensure": ("we need to ensure the {noun} is ready", "ensure you bring {person}",
                   "i will ensure the {noun} is {adj}", "to ensure a {adj} {noun}"),
    },
    "pattern_negative": (
        "i took {amount} nap {time}",
        "i took {amount} shot at the {noun} and missed",
        "need some {food} {time}",
        "ran out of {food} again {time}",
        "is it safe to mix {food} and {food2}",
        "the {food} is finally kicking in",
        "just took {amount} {noun} pics {time}",
    ),
    "medical": (
        "my {symptom} is killing me {time}",
        "doctor said i need rest for this {symptom}",
        "{symptom} all week ugh",
        "overdose of {food} {time} lol",
        "waiting at the {medical} for {person}",
        "this {symptom} is not working for me",
        "my {medical} {time} was so {adj}",
        "{person} has a {symptom} and the {medical} is closed",
        "i need a {medical} for my {symptom}",
        "feeling {feeling} after the {medical}",
    ),
    "general": (
        "going to the {noun} with {person} {time}",
        "this {noun} is so {adj}",
        "cant wait for the {noun} {time}",
        "{person} made {food} {time}",
        "best {noun} ever with {person}",
        "why is the {noun} always so {adj}",
        "<user> the {noun} was {adj} lol",
        "{time} is all about {food} and the {noun}",
        "<url> look at this {adj} {noun}",
        "me and {person} at the {noun}",
    ),
}

PATTERNS = (
    r"\btook (a|an|some|two|three|my|an extra) \w+",
    r"\bneed some \w+",
    r"\bran out of \w+",
    r"\bmix \w+ and \w+",
    r"\bthe \w+ is finally kicking in",
    r"\bcant sleep without my \w+",
)

NATURAL_MIX = {
    "drug": 0.0020, "drug_misspelled": 0.0006, "drug_unlisted": 0.0003,
    "drug_ambiguous": 0.0001, "homograph": 0.005, "pattern_negative": 0.01,
    "medical": 0.02, "medical_frame": 0.02, "chatter": 0.5,
}
TIMELINE_MIX = {
    "drug": 0.05, "drug_misspelled": 0.012, "drug_unlisted": 0.006, "drug_ambiguous": 0.002,
    "homograph": 0.03, "pattern_negative": 0.04, "medical": 0.04, "medical_frame": 0.04,
    "chatter": 0.1,
}
POSITIVE_CATEGORIES = frozenset({"drug", "drug_misspelled", "drug_unlisted", "drug_ambiguous"})

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"
_CLUSTERS = ("drug", "medical", "music", "food", "general", "people", "time", "function")


def _pick(rng, seq):
    return seq[int(rng.integers(len(seq)))]


def misspell(rng: np.random.Generator, word: str, edits: int = 1) -> str:
    """Apply ``edits`` random deletions/insertions/substitutions/transpositions."""
    for _ in range(edits):
        op = int(rng.integers(4))
        i = int(rng.integers(1, len(word) - 1))  # keep the first and last letter
        c = _pick(rng, _ALPHABET)
        if op == 0:
            cand = word[:i] + word[i + 1:]
        elif op == 1:
            cand = word[:i] + c + word[i:]
        elif op == 2:
            cand = word[:i] + c + word[i + 1:]
        else:
            cand = word[:i] + word[i + 1] + word[i] + word[i + 2:]
        word = cand if cand != word else word[:i] + word[i] + word[i:]
    return word


@dataclass
class SyntheticWorld:
    lexicon: Lexicon
    seeds: tuple
    patterns: PatternSet
    common_words: frozenset
    embeddings: EmbeddingTable
    random_state: int = 0
    _rng: np.random.Generator = field(default=None, repr=False)

    def __post_init__(self):
        self._rng = np.random.default_rng(self.random_state + 1)

    def tweet_text(self, category: str, rng: np.random.Generator | None = None) -> str:
        rng = self._rng if rng is None else rng
        slots = {
            "amount": _pick(rng, AMOUNTS), "symptom": _pick(rng, SYMPTOMS),
            "feeling": _pick(rng, FEELINGS), "time": _pick(rng, TIMES),
            "noun": _pick(rng, GENERAL_NOUNS), "adj": _pick(rng, GENERAL_ADJ),
            "person": _pick(rng, PEOPLE), "music": _pick(rng, MUSIC),
            "food": _pick(rng, FOOD), "food2": _pick(rng, FOOD), "medical": _pick(rng, MEDICAL),
            "drug2": _pick(rng, LEXICON_DRUGS),
        }
        if category in POSITIVE_CATEGORIES:
            if category == "drug":
                drug = _pick(rng, LEXICON_DRUGS if rng.random() < 0.5 else RARE_DRUGS)
            elif category == "drug_misspelled":
                drug = misspell(rng, _pick(rng, LEXICON_DRUGS), 1 if rng.random() < 0.75 else 2)
            elif category == "drug_unlisted":
                drug = _pick(rng, UNLISTED_DRUGS)
            else:
                drug = _pick(rng, ("lyrica", "halls", "airborne", "ensure"))
            template = _pick(rng, TEMPLATES["drug"])
            return template.format(drug=drug, **slots)
        if category == "medical_frame":
            template = _pick(rng, TEMPLATES["drug"])
            slots["drug2"] = _pick(rng, NON_DRUG_FILLERS)
            return template.format(drug=_pick(rng, NON_DRUG_FILLERS), **slots)
        if category == "chatter":
            return self._chatter(rng)
        if category == "homograph":
            word = _pick(rng, HOMOGRAPHS)
            return _pick(rng, TEMPLATES["homograph"][word]).format(**slots)
        return _pick(rng, TEMPLATES[category]).format(**slots)

    def _chatter(self, rng: np.random.Generator) -> str:
        # open-domain tail of the stream: word order and topic are unconstrained,
        # one word in five has no vector and one in five is about health
        words = []
        for _ in range(int(rng.integers(4, 13))):
            u = rng.random()
            if u < 0.2:
                words.append("".join(_pick(rng, _ALPHABET) for _ in range(int(rng.integers(3, 9)))))
            elif u < 0.4:
                words.append(_pick(rng, SYMPTOMS + MEDICAL))
            else:
                words.append(_pick(rng, self._chatter_vocab))
        return " ".join(words)

    @property
    def _chatter_vocab(self) -> tuple:
        return tuple(sorted(w for w, c in _vocabulary().items()
                            if c != "drug" and not w.startswith("<") and w not in HOMOGRAPHS))

    def sample(self, n: int, mix: dict, rng: np.random.Generator,
               id_prefix: str = "t") -> tuple[Corpus, list[str]]:
        """``n`` labeled tweets; categories not in ``mix`` are filled by ``general``."""
        cats = list(mix) + ["general"]
        probs = np.array([mix[c] for c in mix] + [1.0 - sum(mix.values())])
        draws = rng.choice(len(cats), size=n, p=probs)
        items, categories = [], []
        for i, d in enumerate(draws):
            cat = cats[int(d)]
            text = self.tweet_text(cat, rng)
            items.append(LabeledTweet(Tweet.from_raw(f"{id_prefix}{i:06d}", text),
                                      int(cat in POSITIVE_CATEGORIES)))
            categories.append(cat)
        return Corpus(items, f"synthetic:{id_prefix}"), categories


def _vocabulary() -> dict[str, str]:
    vocab: dict[str, str] = {}

    def add(words, cluster):
        for phrase in words:
            for w in phrase.split():
                vocab.setdefault(w, cluster)

    add(LEXICON_DRUGS + UNLISTED_DRUGS, "drug")
    add(SYMPTOMS + MEDICAL + ("rest", "safe", "helps", "sleep", "kicking"), "medical")
    add(MUSIC + ("lyrica", "anderson", "listening", "fire"), "music")
    add(FOOD + ("tea", "milk", "burger"), "food")
    add(GENERAL_NOUNS + GENERAL_ADJ + ("halls", "airborne", "ensure", "flight", "kite", "school",
                                       "fame", "pics", "home", "ready", "decorating", "walking",
                                       "empty", "shot", "missed", "bring", "team"), "general")
    add(PEOPLE + ("kids", "husband", "sister", "baby", "<user>", "<url>"), "people")
    add(TIMES + ("morning", "week", "ever", "again", "asap", "finally"), "time")
    add(("i", "took", "a", "an", "two", "three", "some", "my", "extra", "for", "is", "the",
         "right", "now", "need", "this", "me", "and", "feel", "gave", "just", "gonna", "ran",
         "out", "of", "it", "to", "mix", "in", "cant", "without", "try", "with", "was", "ugh",
         "best", "friend", "were", "all", "day", "on", "new", "at", "our", "got", "we", "you",
         "will", "going", "so", "wait", "made", "why", "always", "lol", "look", "be", "has",
         "not", "working", "said", "after", "closed", "feeling", "waiting", "killing", "am",
         "actually", "really", "like", "of", "are", "about", "up", "pain", "back", "throat",
         "sore", "better", "sleepy", "great", "weird", "dizzy", "calm", "tired", "amazing"),
        "function")
    return vocab


def make_embeddings(dim: int = 16, random_state: int = 0, spread: float = 0.35,
                    medical_pull: float = 0.6) -> EmbeddingTable:
    """Topic-clustered word vectors; homographs sit between their two senses.

    The medical cluster is pulled ``medical_pull`` of the way toward the drug
    cluster, as health vocabulary co-occurs with drug names in real text.
    """
    rng = np.random.default_rng(random_state)
    centers = {c: rng.normal(size=dim) for c in _CLUSTERS}
    centers["medical"] = ((1 - medical_pull) * centers["medical"]
                          + medical_pull * centers["drug"])
    vocab = _vocabulary()
    entries = {}
    for word in sorted(vocab):
        entries[word] = centers[vocab[word]] + spread * rng.normal(size=dim)
    mixes = {"lyrica": "music", "halls": "general", "airborne": "general", "ensure": "general"}
    for word, other in mixes.items():
        entries[word] = (0.5 * centers["drug"] + 0.5 * centers[other]
                         + spread * rng.normal(size=dim))
    return EmbeddingTable.from_dict(entries)


def make_world(random_state: int = 0, embedding_dim: int = 16) -> SyntheticWorld:
    lexicon = Lexicon.from_strings(LEXICON_DRUGS + RARE_DRUGS + HOMOGRAPHS, source="synthetic lexicon")
    vocab = _vocabulary()
    common = frozenset(w for w, c in vocab.items() if c != "drug") - set(HOMOGRAPHS)
    return SyntheticWorld(
        lexicon=lexicon,
        seeds=SEED_NAMES,
        patterns=PatternSet.from_strings(PATTERNS),
        common_words=common,
        embeddings=make_embeddings(embedding_dim, random_state),
        random_state=random_state,
    )
