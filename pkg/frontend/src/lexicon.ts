// Seed lexicon for the rule-based German model: closed-class words with
// their tag/lemma/morphology, irregular lemmas, first names with gender,
// and sentence-internal abbreviations.

export interface LexEntry {
  pos: string;
  lemma?: string;
  morph?: Record<string, string>;
}

const M = (gender: string, number: string, kase?: string): Record<string, string> => {
  const features: Record<string, string> = { Gender: gender, Number: number };
  if (kase) features.Case = kase;
  return features;
};

export const CLOSED_CLASS: Record<string, LexEntry> = {
  der: { pos: "ART", lemma: "der", morph: M("Masc", "Sing", "Nom") },
  die: { pos: "ART", lemma: "der", morph: M("Fem", "Sing", "Nom") },
  das: { pos: "ART", lemma: "der", morph: M("Neut", "Sing", "Nom") },
  den: { pos: "ART", lemma: "der", morph: M("Masc", "Sing", "Acc") },
  dem: { pos: "ART", lemma: "der", morph: M("Masc", "Sing", "Dat") },
  des: { pos: "ART", lemma: "der", morph: M("Masc", "Sing", "Gen") },
  ein: { pos: "ART", lemma: "ein", morph: M("Masc", "Sing", "Nom") },
  eine: { pos: "ART", lemma: "ein", morph: M("Fem", "Sing", "Nom") },
  einen: { pos: "ART", lemma: "ein", morph: M("Masc", "Sing", "Acc") },
  einem: { pos: "ART", lemma: "ein", morph: M("Masc", "Sing", "Dat") },
  einer: { pos: "ART", lemma: "ein", morph: M("Fem", "Sing", "Dat") },
  eines: { pos: "ART", lemma: "ein", morph: M("Neut", "Sing", "Gen") },
  und: { pos: "KON", lemma: "und" },
  oder: { pos: "KON", lemma: "oder" },
  aber: { pos: "KON", lemma: "aber" },
  sondern: { pos: "KON", lemma: "sondern" },
  denn: { pos: "KON", lemma: "denn" },
  dass: { pos: "KOUS", lemma: "dass" },
  weil: { pos: "KOUS", lemma: "weil" },
  wenn: { pos: "KOUS", lemma: "wenn" },
  ob: { pos: "KOUS", lemma: "ob" },
  in: { pos: "APPR", lemma: "in" },
  im: { pos: "APPRART", lemma: "in" },
  an: { pos: "APPR", lemma: "an" },
  am: { pos: "APPRART", lemma: "an" },
  auf: { pos: "APPR", lemma: "auf" },
  aus: { pos: "APPR", lemma: "aus" },
  bei: { pos: "APPR", lemma: "bei" },
  beim: { pos: "APPRART", lemma: "bei" },
  mit: { pos: "APPR", lemma: "mit" },
  nach: { pos: "APPR", lemma: "nach" },
  seit: { pos: "APPR", lemma: "seit" },
  von: { pos: "APPR", lemma: "von" },
  vom: { pos: "APPRART", lemma: "von" },
  zu: { pos: "APPR", lemma: "zu" },
  zum: { pos: "APPRART", lemma: "zu" },
  zur: { pos: "APPRART", lemma: "zu" },
  für: { pos: "APPR", lemma: "für" },
  über: { pos: "APPR", lemma: "über" },
  unter: { pos: "APPR", lemma: "unter" },
  gegen: { pos: "APPR", lemma: "gegen" },
  ohne: { pos: "APPR", lemma: "ohne" },
  durch: { pos: "APPR", lemma: "durch" },
  um: { pos: "APPR", lemma: "um" },
  vor: { pos: "APPR", lemma: "vor" },
  ich: { pos: "PPER", lemma: "ich", morph: { Number: "Sing", Person: "1" } },
  du: { pos: "PPER", lemma: "du", morph: { Number: "Sing", Person: "2" } },
  er: { pos: "PPER", lemma: "er", morph: M("Masc", "Sing", "Nom") },
  sie: { pos: "PPER", lemma: "sie", morph: M("Fem", "Sing", "Nom") },
  es: { pos: "PPER", lemma: "es", morph: M("Neut", "Sing", "Nom") },
  wir: { pos: "PPER", lemma: "wir", morph: { Number: "Plur", Person: "1" } },
  ihr: { pos: "PPER", lemma: "ihr", morph: { Number: "Plur", Person: "2" } },
  mein: { pos: "PPOSAT", lemma: "mein" },
  meine: { pos: "PPOSAT", lemma: "mein" },
  meiner: { pos: "PPOSAT", lemma: "mein" },
  unsere: { pos: "PPOSAT", lemma: "unser" },
  seine: { pos: "PPOSAT", lemma: "sein" },
  ihre: { pos: "PPOSAT", lemma: "ihr" },
  sich: { pos: "PRF", lemma: "sich" },
  nicht: { pos: "PTKNEG", lemma: "nicht" },
  sehr: { pos: "ADV", lemma: "sehr" },
  auch: { pos: "ADV", lemma: "auch" },
  noch: { pos: "ADV", lemma: "noch" },
  schon: { pos: "ADV", lemma: "schon" },
  nun: { pos: "ADV", lemma: "nun" },
  heute: { pos: "ADV", lemma: "heute" },
  hier: { pos: "ADV", lemma: "hier" },
  so: { pos: "ADV", lemma: "so" },
  dann: { pos: "ADV", lemma: "dann" },
  jetzt: { pos: "ADV", lemma: "jetzt" },
  ist: { pos: "VAFIN", lemma: "sein", morph: { Number: "Sing", Person: "3" } },
  sind: { pos: "VAFIN", lemma: "sein", morph: { Number: "Plur", Person: "3" } },
  war: { pos: "VAFIN", lemma: "sein", morph: { Number: "Sing", Person: "3" } },
  waren: { pos: "VAFIN", lemma: "sein", morph: { Number: "Plur", Person: "3" } },
  hat: { pos: "VAFIN", lemma: "haben", morph: { Number: "Sing", Person: "3" } },
  haben: { pos: "VAFIN", lemma: "haben", morph: { Number: "Plur", Person: "3" } },
  hatte: { pos: "VAFIN", lemma: "haben", morph: { Number: "Sing", Person: "3" } },
  wird: { pos: "VAFIN", lemma: "werden", morph: { Number: "Sing", Person: "3" } },
  werden: { pos: "VAFIN", lemma: "werden", morph: { Number: "Plur", Person: "3" } },
  wurde: { pos: "VAFIN", lemma: "werden", morph: { Number: "Sing", Person: "3" } },
  kann: { pos: "VMFIN", lemma: "können", morph: { Number: "Sing", Person: "3" } },
  können: { pos: "VMFIN", lemma: "können", morph: { Number: "Plur", Person: "3" } },
  muss: { pos: "VMFIN", lemma: "müssen", morph: { Number: "Sing", Person: "3" } },
  soll: { pos: "VMFIN", lemma: "sollen", morph: { Number: "Sing", Person: "3" } },
  will: { pos: "VMFIN", lemma: "wollen", morph: { Number: "Sing", Person: "3" } },
  darf: { pos: "VMFIN", lemma: "dürfen", morph: { Number: "Sing", Person: "3" } },
};

export const IRREGULAR_LEMMAS: Record<string, string> = {
  Damen: "Dame",
  Herren: "Herr",
  Frauen: "Frau",
  Männer: "Mann",
  Kollegen: "Kollege",
  Kolleginnen: "Kollegin",
  Abgeordneten: "Abgeordnete",
  Präsidenten: "Präsident",
  Fraktionen: "Fraktion",
  Anträge: "Antrag",
  Gesetze: "Gesetz",
  Häuser: "Haus",
  Länder: "Land",
  Städte: "Stadt",
  Ausschüsse: "Ausschuss",
  Sitzungen: "Sitzung",
  Stimmen: "Stimme",
  Jahre: "Jahr",
  Jahren: "Jahr",
  Tage: "Tag",
  verehrten: "verehren",
  verehrte: "verehren",
  geehrten: "ehren",
  geehrte: "ehren",
  liebe: "lieb",
  lieben: "lieb",
  spricht: "sprechen",
  sprach: "sprechen",
  gibt: "geben",
  geht: "gehen",
  kommt: "kommen",
  dankt: "danken",
  eröffnet: "eröffnen",
  beraten: "beraten",
  beschlossen: "beschließen",
  angenommen: "annehmen",
  geschlossen: "schließen",
};

export const FIRST_NAMES: Record<string, "Masc" | "Fem"> = {
  Winfried: "Masc",
  Wolfgang: "Masc",
  Hans: "Masc",
  Peter: "Masc",
  Michael: "Masc",
  Thomas: "Masc",
  Klaus: "Masc",
  Jürgen: "Masc",
  Werner: "Masc",
  Helmut: "Masc",
  Konrad: "Masc",
  Willy: "Masc",
  Angela: "Fem",
  Ursula: "Fem",
  Petra: "Fem",
  Sabine: "Fem",
  Monika: "Fem",
  Karin: "Fem",
  Renate: "Fem",
  Annalena: "Fem",
};

export const KNOWN_PLACES = new Set([
  "Deutschland", "Österreich", "Berlin", "München", "Stuttgart", "Wien",
  "Bayern", "Sachsen", "Hessen", "Bremen", "Hamburg", "Thüringen",
  "Brandenburg", "Saarland", "Niedersachsen", "Dresden", "Wiesbaden",
  "Hannover", "Mainz", "Kiel", "Schwerin", "Erfurt", "Potsdam",
]);

export const ABBREVIATIONS = new Set([
  "Dr.", "Prof.", "Abs.", "Art.", "Nr.", "S.", "Abg.", "Hr.", "Fr.",
  "bzw.", "usw.", "ca.", "vgl.", "ggf.", "inkl.", "z.", "B.", "u.", "a.",
  "Mio.", "Mrd.", "sog.", "etc.",
]);
