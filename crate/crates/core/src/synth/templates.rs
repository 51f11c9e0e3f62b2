//! Sentence templates for planted mentions and background text.

use crate::ruleng::{Assertion, ConceptCategory, DurationClass};

use Assertion::{Hypothetical as H, Negated as N, Positive as P};
use ConceptCategory::*;

/// A sentence that plants one concept with a fixed assertion. `also` lists
/// every other (concept, assertion) the default rules find in it.
#[derive(Debug, Clone, Copy)]
pub struct PlantTemplate {
    pub concept: ConceptCategory,
    pub assertion: Assertion,
    pub duration: Option<DurationClass>,
    pub text: &'static str,
    pub also: &'static [(ConceptCategory, Assertion)],
}

impl PlantTemplate {
    /// All (concept, assertion) pairs the sentence should yield.
    pub fn declared(&self) -> Vec<(ConceptCategory, Assertion)> {
        let mut v = vec![(self.concept, self.assertion)];
        v.extend_from_slice(self.also);
        v.sort_by_key(|(c, _)| *c);
        v
    }
}

const fn t(concept: ConceptCategory, assertion: Assertion, text: &'static str) -> PlantTemplate {
    PlantTemplate {
        concept,
        assertion,
        duration: None,
        text,
        also: &[],
    }
}

const fn multi(
    concept: ConceptCategory,
    assertion: Assertion,
    text: &'static str,
    also: &'static [(ConceptCategory, Assertion)],
) -> PlantTemplate {
    PlantTemplate {
        concept,
        assertion,
        duration: None,
        text,
        also,
    }
}

const fn dur(class: DurationClass, text: &'static str) -> PlantTemplate {
    PlantTemplate {
        concept: SleepDuration,
        assertion: P,
        duration: Some(class),
        text,
        also: &[],
    }
}

/// Subject fillers for `{pt}`.
pub const SUBJECTS: [&str; 4] = ["Patient", "She", "He", "The patient"];
/// Relative fillers for `{fam}`.
pub const RELATIVES: [&str; 6] = ["daughter", "son", "wife", "husband", "caregiver", "niece"];

pub const PLANTS: &[PlantTemplate] = &[
    // snoring
    t(Snoring, P, "{pt} reports loud snoring most nights."),
    t(Snoring, P, "{pt} snored through the night per the {fam}."),
    t(Snoring, P, "The {fam} says the patient snores loudly."),
    t(Snoring, P, "Snorings noted by the {fam}."),
    t(Snoring, P, "The {fam} complains that the patient will snore."),
    multi(Snoring, P, "History of sleep apnea, uses CPAP nightly.", &[(SleepProblem, P)]),
    multi(Snoring, P, "OSA on BiPAP.", &[(SleepProblem, P)]),
    multi(Snoring, P, "Diagnosed with obstructive sleep apnea in 2015.", &[(SleepProblem, P)]),
    t(Snoring, N, "{pt} denies snoring."),
    t(Snoring, N, "No snoring reported by the {fam}."),
    multi(Snoring, N, "Negative for sleep apnea.", &[(SleepProblem, N)]),
    t(Snoring, H, "Advised the {fam} to monitor for snoring."),
    t(Snoring, H, "Call if snoring becomes loud."),
    multi(Snoring, H, "Increased risk of sleep apnea discussed.", &[(SleepProblem, H)]),
    // napping
    t(Napping, P, "{pt} takes a nap every afternoon."),
    t(Napping, P, "{pt} naps twice daily."),
    t(Napping, P, "Napping in the recliner most afternoons."),
    t(Napping, P, "{pt} tends to doze in the afternoon."),
    t(Napping, P, "{pt} became confused after waking up from a nap."),
    t(Napping, P, "The {fam} notes the patient is doing less and does nap during the day."),
    t(Napping, N, "{pt} denies napping."),
    t(Napping, N, "No naps during the day."),
    t(Napping, H, "Consider a short nap after lunch."),
    t(Napping, H, "Recommend limiting naps to 30 minutes."),
    // sleep problem
    t(SleepProblem, P, "History of insomnia."),
    t(SleepProblem, P, "Insomnia, on trazodone."),
    t(SleepProblem, P, "{pt} has a sleep disorder."),
    t(SleepProblem, P, "Hypersomnia noted on prior evaluation."),
    t(SleepProblem, P, "Parasomnia with talking episodes."),
    t(SleepProblem, P, "Idiopathic hypersomnolence."),
    multi(SleepProblem, P, "Sleeplessness over the past month.", &[(BadSleepQuality, P)]),
    multi(SleepProblem, P, "Ongoing sleep problems per the {fam}.", &[(BadSleepQuality, P)]),
    t(SleepProblem, N, "Denies insomnia."),
    t(SleepProblem, N, "No history of parasomnia."),
    t(SleepProblem, N, "Negative for hypersomnia."),
    t(SleepProblem, H, "Will screen for insomnia at next visit."),
    multi(
        SleepProblem,
        H,
        "Depression screen done 7/2017, PHQ9 score 16 points for sleep problem which seems better now.",
        &[(BadSleepQuality, H)],
    ),
    // bad sleep quality
    t(BadSleepQuality, P, "{pt} has been staying up late."),
    t(BadSleepQuality, P, "Staying up all night per the {fam}."),
    t(BadSleepQuality, P, "Trouble falling asleep."),
    t(BadSleepQuality, P, "{pt} is irritable and has trouble sleeping."),
    t(BadSleepQuality, P, "{pt} has been tense and unable to sleep."),
    t(BadSleepQuality, P, "{pt} sleeps poorly since the move."),
    t(BadSleepQuality, P, "Sleep is poor."),
    t(BadSleepQuality, P, "Restless sleep reported."),
    t(BadSleepQuality, P, "{pt} can't sleep most nights."),
    t(BadSleepQuality, P, "{pt} couldn't sleep during night."),
    t(BadSleepQuality, P, "{pt} cannot sleep without the television on."),
    t(BadSleepQuality, P, "Sleep issues reported by the {fam}."),
    t(BadSleepQuality, P, "Sleeping has been problematic."),
    t(BadSleepQuality, P, "{pt} sleeps a lot lately."),
    t(BadSleepQuality, P, "Difficulty falling asleep."),
    t(BadSleepQuality, P, "Sleep disturbance noted."),
    t(BadSleepQuality, P, "Disturbance in sleep since the fall."),
    t(BadSleepQuality, P, "Sleep quality: fair."),
    t(BadSleepQuality, P, "{pt} is not sleeping well."),
    t(BadSleepQuality, P, "No sleep for two days."),
    multi(BadSleepQuality, P, "Reports sleeplessness.", &[(SleepProblem, P)]),
    t(BadSleepQuality, P, "Sleep difficulty persists."),
    t(BadSleepQuality, P, "Nocturnal agitation worse this week."),
    t(BadSleepQuality, P, "Up at night wandering the house."),
    t(BadSleepQuality, P, "Nocturnal confusion reported."),
    t(BadSleepQuality, P, "{pt} is often awake before dawn."),
    t(BadSleepQuality, N, "Denies trouble sleeping."),
    t(BadSleepQuality, N, "Negative for sleep disturbance."),
    t(BadSleepQuality, N, "{pt} denies restless sleep."),
    t(
        BadSleepQuality,
        H,
        "Take Melatonin 5 mg at bedtime every night for 3-4 weeks for difficulty falling asleep.",
    ),
    t(BadSleepQuality, H, "If trouble sleeping persists, call the clinic."),
    // daytime sleepiness
    t(DaytimeSleepiness, P, "Excessive daytime sleepiness noted."),
    t(DaytimeSleepiness, P, "Daytime somnolence reported by the {fam}."),
    t(DaytimeSleepiness, P, "{pt} sleeps at times during the visit."),
    t(DaytimeSleepiness, P, "{pt} sleeps in the daytime."),
    t(DaytimeSleepiness, P, "Sleepiness during the day."),
    t(DaytimeSleepiness, P, "{pt} will sleep all day."),
    multi(
        DaytimeSleepiness,
        P,
        "{pt} tends to sleep a lot through out the day.",
        &[(BadSleepQuality, P)],
    ),
    t(DaytimeSleepiness, N, "Denies daytime sleepiness."),
    t(DaytimeSleepiness, N, "No excessive daytime sleepiness."),
    t(DaytimeSleepiness, H, "Monitor for daytime sleepiness on the new medication."),
    // night wakings
    t(NightWakings, P, "Night awakenings three times weekly."),
    t(NightWakings, P, "Frequent night waking reported."),
    t(NightWakings, P, "{pt} wakes several times each night."),
    t(NightWakings, P, "Waking up in the middle of the night."),
    t(NightWakings, P, "Waking up 3-5 times per night."),
    t(NightWakings, P, "{pt} is awakening from nightmares."),
    t(NightWakings, P, "Awake at night pacing."),
    multi(
        NightWakings,
        P,
        "{pt} wakes up at night to use the bathroom.",
        &[(BadSleepQuality, P)],
    ),
    t(NightWakings, N, "Denies night awakenings."),
    multi(NightWakings, N, "{pt} does not wake up at night.", &[(BadSleepQuality, N)]),
    t(NightWakings, H, "Monitor for night awakenings after the dose change."),
    // sleep duration
    dur(DurationClass::Short, "{pt} sleeps 4-5 hours a night."),
    dur(DurationClass::Short, "{pt} sleeps less than 5 hours."),
    dur(DurationClass::Short, "Sleeping up to 6 hours."),
    dur(DurationClass::Medium, "{pt} sleeps about 7-8 hours."),
    dur(DurationClass::Medium, "Sleeps 6-8 hours on most nights."),
    dur(DurationClass::Long, "{pt} will sleep more than 12 hours."),
    dur(DurationClass::Long, "Sleeps 9-10 hours nightly."),
];

/// Background sentences mentioning a retrieval keyword outside any sleep
/// concept, paired with that keyword.
pub const KEYWORD_DISTRACTORS: &[(&str, &str)] = &[
    ("Lungs clear to auscultation, no wheezing.", "wheezing"),
    ("Mild expiratory wheeze on the left.", "wheeze"),
    ("Reports dizziness when standing quickly.", "dizziness"),
    ("Awake and alert, wakefulness appropriate.", "wakefulness"),
    ("EEG showed normal REM and NREM architecture.", "rem"),
    ("Polysomnography report from 2018 reviewed.", "polysomnography"),
    ("No central apnea or hypopnea during sedation.", "apnea"),
    ("Somnolent after anesthesia, resolved in recovery.", "somnolent"),
    ("Family history of narcolepsy in a cousin.", "narcolepsy"),
    ("Waking blood glucose was 110.", "waking"),
];

/// Keyword-free, concept-free sentences for bulk text. Slots are filled from
/// the pools below.
pub const FILLER: &[&str] = &[
    "Seen today for {reason}.",
    "Blood pressure {bp}, heart rate {hr}.",
    "Continue {med} {dose} mg {freq}.",
    "The {fam} helps with {task}.",
    "Labs show {lab} of {value}.",
    "Discussed {topic} with the {fam}.",
    "Follow up in {n} {unit}.",
    "Exam notable for {finding}.",
    "Weight {w} lbs, {trend} since last visit.",
    "Plan to {plan}.",
    "MMSE score {mmse} of 30.",
    "Ambulates with a {device}.",
    "Started {med} for {reason}.",
    "Referred to {specialty} for {reason}.",
];

pub const REASONS: &[&str] = &[
    "knee pain", "memory decline", "a urinary tract infection", "back pain", "constipation",
    "poor appetite", "weight loss", "cough", "fatigue", "hip fracture follow up", "a skin rash",
    "hearing loss", "medication review", "agitation", "a fall at home", "swallowing concerns",
    "hypertension", "diabetes management", "atrial fibrillation", "chest discomfort",
];
pub const MEDS: &[&str] = &[
    "lisinopril", "metformin", "donepezil", "memantine", "atorvastatin", "amlodipine",
    "sertraline", "omeprazole", "aspirin", "levothyroxine", "furosemide", "metoprolol",
    "rivastigmine", "citalopram", "warfarin", "gabapentin", "tamsulosin", "vitamin D",
];
pub const FREQS: &[&str] = &["daily", "twice daily", "every morning", "weekly", "as needed"];
pub const TASKS: &[&str] = &[
    "medications", "meals", "bathing", "finances", "transportation", "dressing", "shopping",
    "laundry", "appointments",
];
pub const LABS: &[&str] = &[
    "hemoglobin A1c", "sodium", "potassium", "creatinine", "TSH", "vitamin B12", "LDL",
    "hemoglobin", "platelets", "albumin",
];
pub const TOPICS: &[&str] = &[
    "advance directives", "driving safety", "home safety", "fall prevention", "diet changes",
    "exercise", "hospice options", "respite care", "memory care placement", "hearing aids",
];
pub const UNITS: &[&str] = &["weeks", "months"];
pub const FINDINGS: &[&str] = &[
    "mild edema", "a soft murmur", "decreased hearing", "dry skin", "an unsteady gait",
    "tremor of the right hand", "clear lungs", "a healed incision", "normal bowel sounds",
    "bruising on the forearm",
];
pub const TRENDS: &[&str] = &["stable", "down 3 lbs", "up 2 lbs", "down 5 lbs", "unchanged"];
pub const PLANS: &[&str] = &[
    "repeat labs", "adjust the dose", "order a hip x-ray", "check orthostatic vitals",
    "start physical therapy", "obtain a urinalysis", "review the pill box", "taper the steroid",
    "schedule a hearing test", "arrange home health",
];
pub const DEVICES: &[&str] = &["cane", "walker", "rollator", "wheelchair"];
pub const SPECIALTIES: &[&str] = &[
    "neurology", "cardiology", "geriatrics", "urology", "dermatology", "audiology",
    "physical therapy", "psychiatry",
];
pub const CLINICIANS: &[&str] = &[
    "Jane Roe", "John Smith", "Maria Lopez", "Wei Chen", "Aisha Khan", "Peter Novak",
    "Laura Jensen", "Omar Haddad",
];
