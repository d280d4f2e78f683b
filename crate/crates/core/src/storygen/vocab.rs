use serde::{Deserialize, Serialize};

/// Word lists the generators draw entities from. The four lists must be
/// pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocab {
    pub names: Vec<String>,
    pub objects: Vec<String>,
    pub containers: Vec<String>,
    pub rooms: Vec<String>,
}

const NAMES: &[&str] = &[
    "Abigail",
    "Aiden",
    "Alexander",
    "Amelia",
    "Aria",
    "Avery",
    "Benjamin",
    "Carter",
    "Charlotte",
    "Chloe",
    "Elijah",
    "Ella",
    "Emily",
    "Emma",
    "Ethan",
    "Evelyn",
    "Hannah",
    "Harper",
    "Hunter",
    "Isabella",
    "Isla",
    "Jack",
    "Jackson",
    "Jacob",
    "James",
    "Jayden",
    "Liam",
    "Lily",
    "Logan",
    "Lucas",
    "Mason",
    "Mia",
    "Nathan",
    "Noah",
    "Oliver",
    "Owen",
    "Sophia",
    "William",
];

const OBJECTS: &[&str] = &[
    "apple",
    "asparagus",
    "banana",
    "beans",
    "belt",
    "boots",
    "broccoli",
    "cabbage",
    "cap",
    "carrot",
    "celery",
    "cherry",
    "coat",
    "corn",
    "cucumber",
    "eggplant",
    "gloves",
    "grapefruit",
    "grapes",
    "hat",
    "jacket",
    "lemon",
    "lettuce",
    "lime",
    "melon",
    "onion",
    "orange",
    "peach",
    "pear",
    "peas",
    "pineapple",
    "potato",
    "pumpkin",
    "radish",
    "scarf",
    "shirt",
    "shoes",
    "skirt",
    "slacks",
    "socks",
    "spinach",
    "stockings",
    "strawberry",
    "suit",
    "sweater",
    "sweet potato",
    "tangerine",
    "tie",
    "tomato",
    "trousers",
    "turnip",
    "underclothes",
    "watermelon",
];

const CONTAINERS: &[&str] = &[
    "basket",
    "bathtub",
    "blue bucket",
    "bottle",
    "box",
    "bucket",
    "cabinet",
    "closet",
    "crate",
    "cupboard",
    "drawer",
    "envelope",
    "green drawer",
    "pantry",
    "red box",
    "refrigerator",
    "suitcase",
    "treasure chest",
    "tub",
    "wooden chest",
];

const ROOMS: &[&str] = &[
    "attic",
    "back yard",
    "basement",
    "bathroom",
    "bedroom",
    "cellar",
    "den",
    "dining room",
    "front yard",
    "garage",
    "garden",
    "hall",
    "hallway",
    "kitchen",
    "laundry",
    "living room",
    "lounge",
    "office",
    "playroom",
    "porch",
    "staircase",
    "study",
    "sunroom",
    "workshop",
];

impl Default for Vocab {
    fn default() -> Self {
        let own = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        Vocab { names: own(NAMES), objects: own(OBJECTS), containers: own(CONTAINERS), rooms: own(ROOMS) }
    }
}

impl Vocab {
    /// Returns the first word that appears in two lists, if any.
    pub fn overlap(&self) -> Option<&str> {
        let lists = [&self.names, &self.objects, &self.containers, &self.rooms];
        for (i, a) in lists.iter().enumerate() {
            for b in &lists[i + 1..] {
                if let Some(w) = a.iter().find(|w| b.contains(w)) {
                    return Some(w);
                }
            }
        }
        None
    }
}
