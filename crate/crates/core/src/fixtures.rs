//! Small built-in dialogues used by tests, examples and the CLI smoke run.

use crate::corpus::{Action, Category, Dialogue, Event, Role, Scenario, Split};

/// The sample bike negotiation: listing $300, buyer target $150, agreed $200.
pub fn bianchi_dialogue() -> Dialogue {
    use Role::{Buyer, Seller};
    let msgs = [
        (Buyer, "Hi. I am interested in your bicycle. How long have you had it for?"),
        (Seller, "I have had it for a little over a month."),
        (Buyer, "Is there anything wrong with it?"),
        (Seller, "Nothing wrong at all pretty much new."),
        (
            Buyer,
            "Okay. I see that you are listing it at $300. However, I can buy a new one for that. \
             Honestly, without any sort of warranty available and the fact that it is used-I can do $150.",
        ),
        (
            Seller,
            "It actually still has over 10 months of the warranty that comes with the bike when you buy it. \
             I will not go as low as $150 I can do $225 though.",
        ),
        (Buyer, "Usually a warranty doesn't transfer if you sell it. I can do $200."),
        (
            Seller,
            "If you have any problems with it, within the next 10 months save my number. \
             I can do $200 you will pick up tonight?",
        ),
        (Buyer, "Sure, I can do that."),
    ];
    let mut events: Vec<Event> = msgs.iter().map(|(r, t)| Event::message(*r, *t)).collect();
    events.push(Event {
        sender: Seller,
        action: Action::Offer(200.0),
    });
    events.push(Event {
        sender: Buyer,
        action: Action::Accept,
    });
    Dialogue {
        id: "bianchi".into(),
        scenario: Scenario {
            category: Category::Bike,
            title: "Single speed bianchi practically new".into(),
            listing_price: 300.0,
            target_price: 150.0,
        },
        events,
        agreed_price: Some(200.0),
        split: Split::Test,
    }
}

const OPENERS: [&str; 5] = [
    "Hi, is the {item} still available?",
    "Hello! I saw your listing for the {item}. What condition is it in?",
    "Hey there, I'm interested in the {item}. Any problems with it?",
    "Hi. How old is the {item}?",
    "Good morning, can you tell me more about the {item}?",
];

const REPLIES: [&str; 5] = [
    "Yes it is. It works great and I've taken good care of it.",
    "It's in excellent condition, barely used.",
    "No problems at all, it has been really reliable.",
    "It's about two years old but still looks new.",
    "Sure, it's a great deal and I have had lots of interest.",
];

const BUYER_OFFERS: [&str; 4] = [
    "Would you take ${p} for it?",
    "I can only afford ${p}. Would that work?",
    "Honestly that's a bit high for me, I can do ${p} cash today.",
    "How about ${p}? I can pick it up right away.",
];

const SELLER_COUNTERS: [&str; 4] = [
    "That's too low. I could do ${p}.",
    "Sorry, I can't go that low. How about ${p}?",
    "I would rather not, but I'll meet you at ${p}.",
    "The lowest I can go is ${p}, it's worth more than that.",
];

const CLOSERS: [&str; 3] = [
    "Okay, ${p} works for me. Deal!",
    "Alright, I'll take it for ${p}. Thanks!",
    "Fine, ${p} it is. When can I come by?",
];

/// Twenty small synthetic negotiations (12 train, 4 validation, 4 test)
/// with the bike sample as the last test dialogue. Fully deterministic.
pub fn mini_corpus() -> Vec<Dialogue> {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use Role::{Buyer, Seller};

    let items: [(Category, &str, f64); 6] = [
        (Category::Bike, "road bike", 400.0),
        (Category::Car, "2009 honda civic", 6000.0),
        (Category::Electronics, "bluetooth speaker", 120.0),
        (Category::Furniture, "oak dining table", 250.0),
        (Category::Housing, "studio apartment", 1500.0),
        (Category::Phone, "unlocked phone", 300.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let round = |x: f64| (x / 5.0).round() * 5.0;
    let mut out = Vec::new();
    for i in 0..19 {
        let (category, item, base) = items[i % items.len()];
        let listing = round(base * rng.gen_range(0.8..1.25));
        let target = round(listing * rng.gen_range(0.5..0.8));
        let agreed = round(target + (listing - target) * rng.gen_range(0.2..0.9));
        let fill = |t: &str, p: f64| t.replace("{item}", item).replace("{p}", &format!("{p}"));
        let mut events = vec![
            Event::message(Buyer, fill(OPENERS[rng.gen_range(0..OPENERS.len())], 0.0)),
            Event::message(Seller, fill(REPLIES[rng.gen_range(0..REPLIES.len())], 0.0)),
        ];
        let rounds = rng.gen_range(1..4);
        let mut buyer = round(target * rng.gen_range(0.9..1.05));
        let mut seller = listing;
        for r in 0..rounds {
            events.push(Event::message(
                Buyer,
                fill(BUYER_OFFERS[rng.gen_range(0..BUYER_OFFERS.len())], buyer.min(agreed)),
            ));
            let last = r + 1 == rounds;
            seller = if last { agreed } else { round((seller + agreed) / 2.0 + (listing - agreed) * 0.1) };
            events.push(Event::message(
                Seller,
                fill(SELLER_COUNTERS[rng.gen_range(0..SELLER_COUNTERS.len())], seller),
            ));
            buyer = round((buyer + agreed) / 2.0);
        }
        events.push(Event::message(Buyer, fill(CLOSERS[rng.gen_range(0..CLOSERS.len())], agreed)));
        events.push(Event {
            sender: Seller,
            action: Action::Offer(agreed),
        });
        events.push(Event {
            sender: Buyer,
            action: Action::Accept,
        });
        let split = match i {
            0..=11 => Split::Train,
            12..=15 => Split::Validation,
            _ => Split::Test,
        };
        out.push(Dialogue {
            id: format!("mini-{i:02}"),
            scenario: Scenario {
                category,
                title: format!("{} for sale", capitalize(item)),
                listing_price: listing,
                target_price: target,
            },
            events,
            agreed_price: Some(agreed),
            split,
        });
    }
    out.push(bianchi_dialogue());
    out
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}
