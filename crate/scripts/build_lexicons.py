#!/usr/bin/env python3
"""Builds the bundled open lexicons under crates/core/resources/lexicons.

Inputs are the data files shipped inside three PyPI packages:

    pip download --no-deps empath==0.89 vaderSentiment==3.3.2 textstat==0.7.13

Unpack them into one directory and pass it as the first argument. Hand-written
word lists below cover the families with no openly licensed source.
"""
import os
import sys
import tarfile
import zipfile

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "resources", "lexicons")


def header(kind, name, scores=None):
    line = f"# bargain-lexicon v1 kind={kind} name={name}"
    if scores:
        line += " scores=" + ",".join(scores)
    return line + "\n"


def words(s):
    return s.split()


# ---------------------------------------------------------------- word lists
WORDLISTS = {
    "I": words("i me my mine myself i'm i've i'll i'd"),
    "You": words("you your yours yourself yourselves you're you've you'll you'd u ur"),
    "We": words("we us our ours ourselves we're we've we'll we'd"),
    "They": words("they them their theirs themselves they're they've they'll they'd"),
    "Thank": words("thank thanks thankyou thx ty appreciate appreciated grateful"),
    "Is-high-quantifier": words("all every everything many much lots lot most always very totally completely entire whole plenty tons"),
    "Is-low-quantifier": words("few little some less least rarely bit slightly barely hardly only just somewhat"),
    "Agreement": words("agree agreed agreeable deal ok okay sure yes yeah yep fine accept accepted great perfect alright done works"),
    "Disagreement": words("disagree no nope not never can't cannot won't refuse reject too unfortunately sorry but however"),
    "Has-if": words("if unless whether otherwise suppose assuming"),
    "Is-stress-word": words("really very definitely absolutely seriously honestly truly extremely totally literally must"),
    "Has-final": words("final finally last lowest highest bottom firm best max maximum minimum"),
    "Apology words": words("sorry apologize apologies apology excuse forgive pardon regret unfortunately afraid"),
}

# ------------------------------------------------------------------ formality
FORMALITY = {
    "Formal": words(
        "therefore however furthermore regarding purchase acquire inquire inquiry sufficient "
        "additionally consequently approximately condition excellent require requirement "
        "prefer assist assistance certainly indeed currently kindly regards sincerely "
        "provide possess obtain propose proposal negotiate transaction payment reasonable "
        "considering moreover nevertheless hence thus substantial adequate commence"),
    "Informal": words(
        "yeah yep yup nope gonna wanna gotta kinda sorta lol haha hey hi hiya cool awesome "
        "dude man bro ok okay k thx pls plz cuz coz tho ya yea nah stuff thing guy guys "
        "buck bucks grand wow omg btw idk sup lemme gimme ain't dunno super totally pretty"),
}

# ------------------------------------------------------------------- temporal
TEMPORAL = {
    "Is-past": words(
        "was were had did been ago yesterday previously before earlier last used bought "
        "got paid owned sold came went told said made took gave once former originally"),
    "Is-present": words(
        "is am are be being now today currently present still has have do does "
        "seems looks want need know think see works right here"),
    "Is-future": words(
        "will shall going gonna tomorrow soon later next future plan planning "
        "would could might may tonight upcoming eventually expect"),
}

# ---------------------------------------------------------------------- PERMA
PERMA = {
    "Pos-P": words("happy glad joy enjoy pleasure delighted excited love great wonderful fun smile pleased cheerful"),
    "Neg-P": words("sad unhappy upset angry annoyed miserable hate disappointed frustrated awful terrible worried"),
    "Pos-E": words("interested interest engaged focus curious absorbed passionate eager involved attention"),
    "Neg-E": words("bored boring tired uninterested dull distracted lazy sleepy apathetic disinterested"),
    "Pos-R": words("friend friends family together help support trust care kind share thanks partner neighbor"),
    "Neg-R": words("alone lonely ignore rude distrust betray enemy argue fight selfish unfair liar"),
    "Pos-M": words("meaning purpose worth value important matter believe mission cause significant"),
    "Neg-M": words("pointless meaningless useless worthless waste empty hopeless senseless"),
    "Pos-A": words("achieve accomplish success win goal deal done complete finish earn progress reach"),
    "Neg-A": words("fail failure lose lost quit impossible unable stuck miss missed defeat"),
}

# ------------------------------------------------------------ LIWC substitute
LIWC_WORDS = {
    "I": WORDLISTS["I"],
    "We": WORDLISTS["We"],
    "You": WORDLISTS["You"],
    "They": WORDLISTS["They"],
    "She-He": words("she her hers herself he him his himself she's he's"),
    "Impersonal Pronouns": words("it its itself that this these those something anything everything nothing someone anyone everyone somebody anybody what which"),
    "Articles": words("a an the"),
    "Prepositions": words("about above across after against along among around at before behind below beneath beside between beyond by down during for from in inside into near of off on onto out outside over past since through throughout to toward towards under until up upon with within without"),
    "Auxiliary Verbs": words("am is are was were be been being have has had having do does did will would shall should can could may might must"),
    "Conjunctions": words("and but or nor so yet because although though while whereas unless if also"),
    "Negations": words("no not never none nobody nothing nowhere neither nor don't doesn't didn't isn't aren't wasn't weren't won't wouldn't can't cannot couldn't shouldn't haven't hasn't"),
    "Quantifiers": words("all any both each either enough every few less lot lots many more most much several some"),
    "Numbers": words("zero one two three four five six seven eight nine ten eleven twelve twenty thirty forty fifty hundred thousand million first second third half double"),
    "Interrogatives": words("how what when where which who whom whose why"),
    "Certainty": words("always certain certainly definitely absolutely sure surely clearly obviously never totally completely guarantee"),
    "Tentative": words("maybe perhaps possibly probably might may guess seems seem unsure somewhat almost hope hopefully"),
    "Causal": words("because cause caused since therefore thus hence so reason effect result why"),
    "Insight": words("think thought know knew realize understand understood believe consider feel figure idea"),
    "Discrepancies": words("should would could must need needed want wanted wish hope lack"),
    "Differentiation": words("but however else except instead unless without although otherwise whereas different differently"),
    "Comparisons": words("than like as more less better worse best worst bigger smaller cheaper higher lower same similar"),
    "Assent": words("yes yeah yep ok okay agree agreed sure alright fine absolutely"),
    "Nonfluencies": words("um umm uh uhh er erm hmm hm ah oh"),
    "Filler Words": words("like well basically actually literally anyway kinda sorta"),
    "Netspeak": words("lol lmao omg btw idk thx pls plz u ur k brb imo tbh"),
    "Informal Language": words("lol omg yeah yep nope gonna wanna gotta um uh hmm hey"),
    "Future Focus": TEMPORAL["Is-future"],
    "Past Focus": TEMPORAL["Is-past"],
    "Present Focus": TEMPORAL["Is-present"],
    "Time": words("now today tomorrow yesterday tonight week month year day hour minute soon later early late when time ago while"),
    "Space": words("here there where up down in out above below near far around inside outside local area place location"),
    "Motion": words("go going went come came move moving drive drove walk ride pick pickup deliver bring carry ship"),
    "Adverbs": words("very really just so too quite actually pretty almost only also still even already nearly barely"),
    "Adjectives": words("good great new old nice big small cheap expensive used little best better fair low high excellent perfect"),
    "Verbs": words("is are was were be have has had do does did go get make take sell buy pay give offer want need like think know see"),
    "See": words("see saw seen look looking looks watch view picture pictures photo photos show"),
    "Hear": words("hear heard listen sound sounds said say told tell call"),
    "Feel": words("feel feels felt touch soft hard smooth rough comfortable"),
}

# Empath categories feeding content-oriented LIWC buckets and the EmoLex slots.
LIWC_FROM_EMPATH = {
    "Achievement": ["achievement", "competing"],
    "Affiliation": ["friends", "family", "meeting", "politeness"],
    "Anger": ["anger", "rage", "aggression"],
    "Anx": ["nervousness", "fear"],
    "Biological Processes": ["health", "body", "eating", "sexual"],
    "Body": ["body"],
    "Death": ["death"],
    "Drives": ["achievement", "power", "gain", "dominant_heirarchical"],
    "Family": ["family"],
    "Female": ["feminine"],
    "Friends": ["friends"],
    "Health": ["health", "medical_emergency"],
    "Home": ["home", "domestic_work", "furniture"],
    "Ingest": ["eating", "cooking", "alcohol"],
    "Leisure": ["leisure", "fun", "play", "sports", "vacation"],
    "Male": ["masculine"],
    "Money": ["money", "payment", "banking", "wealthy", "economics"],
    "Negative Emotions": ["negative_emotion"],
    "Positive Emotions": ["positive_emotion"],
    "Power": ["power", "dominant_heirarchical", "leader"],
    "Religion": ["religion", "worship", "divine"],
    "Reward": ["gain", "celebration", "valuable"],
    "Risk": ["danger", "injury", "crime"],
    "Sad": ["sadness"],
    "Sexual": ["sexual", "lust"],
    "Social": ["communication", "speaking", "meeting", "friends"],
    "Swear": ["swearing_terms"],
    "Work": ["work", "occupation", "business", "office"],
    "Certainty": [],
    "Perceptual Processes": ["hearing", "smell", "listen"],
    "Relativity": ["movement", "traveling"],
    "Cognitive Processes": ["philosophy", "confusion"],
}

LIWC_DERIVED = {
    # unions of other buckets
    "Personal Pronouns": ["I", "We", "You", "She-He", "They"],
    "Pronouns": ["I", "We", "You", "She-He", "They", "Impersonal Pronouns"],
    "Function Words": ["I", "We", "You", "She-He", "They", "Impersonal Pronouns", "Articles",
                       "Prepositions", "Auxiliary Verbs", "Conjunctions", "Negations", "Quantifiers"],
    "Affect": ["Positive Emotions", "Negative Emotions", "Anx", "Anger", "Sad"],
    "Cognitive Processes": ["Insight", "Causal", "Discrepancies", "Tentative", "Certainty", "Differentiation"],
    "Perceptual Processes": ["See", "Hear", "Feel"],
    "Relativity": ["Motion", "Space", "Time"],
    "Drives": ["Affiliation", "Achievement", "Power", "Reward", "Risk"],
}

EMOLEX_FROM_EMPATH = {
    "Anger": "anger",
    "Anticipation": "anticipation",
    "Disgust": "disgust",
    "Fear": "fear",
    "Joy": "joy",
    "Negative": "negative_emotion",
    "Positive": "positive_emotion",
    "Sadness": "sadness",
    "Surprise": "surprise",
    "Trust": "trust",
}


def unpack(src):
    for name in os.listdir(src):
        path = os.path.join(src, name)
        if name.endswith(".whl"):
            zipfile.ZipFile(path).extractall(src)
        elif name.endswith(".tar.gz"):
            tarfile.open(path).extractall(src)


def find(src, suffix):
    for root, _, files in os.walk(src):
        for f in files:
            p = os.path.join(root, f)
            if p.endswith(suffix):
                return p
    raise SystemExit(f"missing {suffix} under {src}")


def load_empath(path):
    cats = {}
    with open(path) as fh:
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            cats[parts[0]] = [w.lower() for w in parts[1:] if w and " " not in w]
    return cats


def write_categories(name, term_cats):
    terms = {}
    for cat, ws in term_cats.items():
        for w in ws:
            terms.setdefault(w.lower(), set()).add(cat)
    with open(os.path.join(OUT, f"{name}.tsv"), "w") as fh:
        fh.write(header("categories", name))
        for t in sorted(terms):
            fh.write(t + "\t" + "\t".join(sorted(terms[t])) + "\n")


def main():
    src = sys.argv[1]
    unpack(src)
    empath = load_empath(find(src, "empath/data/categories.tsv"))
    os.makedirs(OUT, exist_ok=True)

    write_categories("wordlists", WORDLISTS)
    write_categories("formality", FORMALITY)
    write_categories("temporal", TEMPORAL)
    write_categories("perma", PERMA)
    write_categories("emolex", {k: empath.get(v, []) for k, v in EMOLEX_FROM_EMPATH.items()})

    liwc = {k: list(v) for k, v in LIWC_WORDS.items()}
    for cat, sources in LIWC_FROM_EMPATH.items():
        for s in sources:
            liwc.setdefault(cat, []).extend(empath.get(s, []))
    for cat, parts in LIWC_DERIVED.items():
        for p in parts:
            liwc.setdefault(cat, []).extend(liwc.get(p, []))
    write_categories("liwc", liwc)

    with open(os.path.join(OUT, "warriner.tsv"), "w") as fh:
        fh.write(header("scored", "warriner", ["valence", "arousal", "dominance"]))
        with open(find(src, "vaderSentiment/vader_lexicon.txt"), encoding="utf-8") as vin:
            for line in vin:
                parts = line.split("\t")
                term = parts[0].strip().lower()
                if not term.isalpha():
                    continue
                valence = 5.0 + float(parts[1])
                fh.write(f"{term}\t{valence:.2f}\tNA\tNA\n")

    easy = find(src, "resources/en/easy_words.txt")
    with open(easy) as fin, open(os.path.join(OUT, "..", "easy_words.txt"), "w") as fout:
        fout.write(fin.read())


if __name__ == "__main__":
    main()
