"""Regenerate the bundled test fixtures (font subset + toy corpus).

Dev-time tool, not part of the installed package.  Requires Pillow and the
DejaVu fonts that ship with matplotlib / the base system.  The outputs are
committed to src/glyphlm/fixtures/, so end users never run this.

Font fixture: `.hex` bitmap font covering ASCII, Latin-1 letters, Cyrillic,
Greek, and 100 synthetic ideograph-style 16x16 glyphs.  Latin/Cyrillic/Greek
glyphs are rasterized from DejaVu Sans Mono Bold into 8x16 cells; the
ideographs are generated deterministically (frame + strokes) since no CJK
outline font is available offline.

Corpus fixture: ~1 MB of deterministic mixed-script word salad (English,
Russian, Greek) with punctuation cadence, occasional digit runs, and
interspersed ideograph sentences.
"""

import random
import sys
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFont

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "glyphlm" / "fixtures"
FONT_PATH = "/usr/share/fonts/truetype/dejavu/DejaVuSansMono-Bold.ttf"

ASCII_RANGE = range(0x20, 0x7F)
LATIN1_LETTERS = [c for c in range(0xC0, 0x100) if chr(c).isalpha()]
CYRILLIC = [0x401] + list(range(0x410, 0x450)) + [0x451]
GREEK = [c for c in range(0x386, 0x3CF) if chr(c).isalpha()]
CJK_BASE = 0x4E00
CJK_COUNT = 100

EN_WORDS = """the of and a to in is was he for it with as his on be at by i this had
not are but from or have an they which one you were her all she there would their we
him been has when who will more no if out so said what up its about into than them can
only other new some could time these two may then do first any my now such like our
over man me even most made after also did many before must through back years where
much your way well down should because each just those people how too little state
good very make world still own see men work long get here between both life being
under never day same another know while last might us great old year off come since
against go came right used take three himself few house use during without again
place around however home small found thought went say part once general high upon
school every does got united left number course war until always away something fact
though water less public put think almost hand enough far took head yet government
system better set told nothing night end why called eyes find going look asked later
knew point next city business case order large group give toward young days let room
within along among things question early white else done big lot side face others
power change interest word given family often kind begin help means god talk country
whole name turn problem open seem together possible team idea clear light feel second
body certain moment either law gone read need land different home members times""".split()

RU_WORDS = """информация правительство образование государственный возможность
международный революция путешествие библиотека строительство преподаватель
замечательный производство благодарность электричество философия литература
университет человек время жизнь день рука работа слово место лицо друг глаз
вопрос дом сторона страна мир случай голова ребенок сила конец вид система
часть город отношение женщина деньги земля машина вода отец проблема час право
нога решение окно причина развитие неделя история мать книга стол улица цель
общество число компания народ жена группа разработка процесс картина министр
результат программа семья область статья школа принцип металл звезда
театр характер искусство календарь руководитель эксперимент представитель
обстоятельство правительственный удовлетворение железнодорожный многочисленный
профессиональный парикмахерская достопримечательность кораблестроение язык
движение внимание качество музыка природа документ хозяйство положение
совет остров берег отдел помощь граница деятельность""".split()

EL_WORDS = """άνθρωπος κόσμος ζωή χρόνος ημέρα χέρι εργασία λέξη θέση πρόσωπο φίλος
μάτι ερώτηση σπίτι πλευρά χώρα ειρήνη περίπτωση κεφάλι παιδί δύναμη τέλος μορφή
σύστημα μέρος πόλη σχέση γυναίκα χρήματα γη μηχανή νερό πατέρας πρόβλημα ώρα
δικαίωμα πόδι απόφαση παράθυρο αιτία ανάπτυξη εβδομάδα ιστορία μητέρα βιβλίο
τραπέζι δρόμος στόχος κοινωνία αριθμός εταιρεία λαός σύζυγος ομάδα διαδικασία
εικόνα υπουργός αποτέλεσμα πρόγραμμα οικογένεια περιοχή άρθρο σχολείο αρχή""".split()


def rasterize_cell(font, ch: str, dy: int) -> np.ndarray:
    img = Image.new("L", (8, 16), 0)
    ImageDraw.Draw(img).text((0, dy), ch, fill=255, font=font)
    a = np.asarray(img, dtype=np.float64) / 255.0
    return (a >= 0.5).astype(np.uint8)


def synth_ideograph(index: int) -> np.ndarray:
    """Deterministic dense 16x16 pseudo-ideograph: frame plus strokes."""
    salt = 0
    while True:
        r = random.Random(index * 4096 + salt)
        g = np.zeros((16, 16), dtype=np.uint8)
        g[1, 1:15] = 1
        g[14, 1:15] = 1
        g[1:15, 1] = 1
        g[1:15, 14] = 1
        for _ in range(r.randint(3, 6)):
            row = r.randint(3, 12)
            a, b = sorted((r.randint(2, 13), r.randint(2, 13)))
            g[row, a : b + 1] = 1
        for _ in range(r.randint(3, 5)):
            col = r.randint(3, 12)
            a, b = sorted((r.randint(2, 13), r.randint(2, 13)))
            g[a : b + 1, col] = 1
        key = g.tobytes()
        if key not in synth_ideograph.seen:
            synth_ideograph.seen.add(key)
            return g
        salt += 1


synth_ideograph.seen = set()


def bitmap_to_hex(cp: int, pixels: np.ndarray) -> str:
    payload = np.packbits(pixels, axis=1).tobytes().hex().upper()
    return f"{cp:04X}:{payload}"


def build_font() -> list[str]:
    font = ImageFont.truetype(FONT_PATH, 16)
    lines = [
        "# glyphlm fixture font: DejaVu Sans Mono Bold rasterized to 8x16 cells",
        "# plus 100 synthetic 16x16 ideograph-style glyphs. Regenerate with",
        "# tools/make_fixtures.py.",
    ]
    seen = set()
    for cp in [*ASCII_RANGE, *LATIN1_LETTERS, *CYRILLIC, *GREEK]:
        if cp in seen:
            continue
        seen.add(cp)
        px = rasterize_cell(font, chr(cp), 0)
        lines.append(bitmap_to_hex(cp, px))
    for i in range(CJK_COUNT):
        lines.append(bitmap_to_hex(CJK_BASE + i, synth_ideograph(i)))
    return lines


def build_corpus() -> str:
    rng = random.Random(20240601)
    cjk_chars = [chr(CJK_BASE + i) for i in range(CJK_COUNT)]
    cjk_rng = random.Random(77)
    cjk_sents = [
        "".join(cjk_rng.choice(cjk_chars) for _ in range(cjk_rng.randint(5, 10)))
        for _ in range(12)
    ]

    parts: list[str] = []
    size = 0
    wc = 0
    capitalize_next = True
    while size < 1_000_000:
        wc += 1
        u = rng.random()
        if u < 0.40:
            w = rng.choice(EN_WORDS)
        elif u < 0.75:
            w = rng.choice(RU_WORDS)
        else:
            w = rng.choice(EL_WORDS)
        if capitalize_next:
            w = w[0].upper() + w[1:]
            capitalize_next = False
        parts.append(w)
        size += len(w)

        if wc % 53 == 0:
            s = rng.choice(cjk_sents)
            parts.append(" " + s)
            size += len(s) + 1
        if wc % 31 == 0:
            n = str(rng.randint(1, 2025))
            parts.append(" " + n)
            size += len(n) + 1

        if wc % 9 == 0:
            sep = ".\n" if wc % 108 == 0 else ". "
            capitalize_next = True
        elif wc % 5 == 0:
            sep = ", "
        else:
            sep = " "
        parts.append(sep)
        size += len(sep)
    parts.append(".\n")
    return "".join(parts)


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    font_lines = build_font()
    (OUT_DIR / "unifont_subset.hex").write_text("\n".join(font_lines) + "\n", encoding="utf-8")
    corpus = build_corpus()
    (OUT_DIR / "toy_corpus.txt").write_text(corpus, encoding="utf-8")
    n_glyphs = sum(1 for ln in font_lines if not ln.startswith("#"))
    print(f"wrote {n_glyphs} glyphs, corpus {len(corpus):,} chars "
          f"({len(corpus.encode('utf-8')):,} bytes)")
    # quick visual sanity for a few rasterized glyphs
    for ch in "AgЖπ":
        from glyphlm.fontstore import parse_hex_line
        for ln in font_lines:
            if ln.startswith(f"{ord(ch):04X}:"):
                _, bm = parse_hex_line(ln)
                print(f"--- {ch!r}")
                for row in bm.pixels:
                    print("".join("#" if v else "." for v in row))
                break


if __name__ == "__main__":
    sys.exit(main())
