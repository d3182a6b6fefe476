//! Built-in synthetic vocabularies for surrogate generation.

pub const FIRST_NAMES: &[&str] = &[
    "Alex", "Avery", "Blake", "Cameron", "Casey", "Dakota", "Drew", "Elliot", "Emerson", "Finley",
    "Harper", "Hayden", "Jamie", "Jordan", "Kendall", "Logan", "Morgan", "Parker", "Peyton", "Quinn",
    "Reese", "Riley", "Rowan", "Sage", "Skyler", "Taylor", "Tatum", "Emery", "Marlow", "Sasha",
    "Noel", "Robin", "Shawn", "Lane", "Arden", "Blair", "Corey", "Devon", "Jessie", "Kerry",
];

pub const LAST_NAMES: &[&str] = &[
    "Abbott", "Barlow", "Calloway", "Dunmore", "Ellison", "Fairchild", "Galloway", "Hartwell", "Ingram", "Jessup",
    "Kingsley", "Lockhart", "Merriweather", "Northcott", "Oakley", "Pendleton", "Quimby", "Radcliffe", "Stanhope", "Thackeray",
    "Underhill", "Vance", "Whitlock", "Yardley", "Ashdown", "Blackwood", "Crowley", "Dalton", "Everly", "Fenwick",
    "Granger", "Holloway", "Kirkland", "Langley", "Marsden", "Norcross", "Prescott", "Rowntree", "Sutherland", "Winslow",
];

/// Street, city and place words.
pub const PLACE_WORDS: &[&str] = &[
    "Alder", "Birch", "Cedar", "Dogwood", "Elm", "Fern", "Glen", "Harbor", "Iris", "Juniper",
    "Kestrel", "Laurel", "Maple", "Newport", "Orchard", "Pine", "Quarry", "Ridge", "Spruce", "Thistle",
    "Upland", "Valley", "Willow", "Yarrow", "Brookside", "Clearwater", "Fairview", "Greenfield", "Hillcrest", "Lakeside",
    "Millbrook", "Northgate", "Riverside", "Springdale", "Westfield", "Ashford", "Bayview", "Crestwood", "Eastwood", "Kingsport",
];

/// Two-letter region codes for state-like tokens.
pub const REGION_CODES: &[&str] = &[
    "AK", "AL", "AR", "AZ", "CO", "CT", "DE", "GA", "HI", "IA", "ID", "IL", "IN", "KS", "KY", "LA", "MD", "ME",
    "MI", "MN", "MO", "MS", "MT", "NC", "ND", "NE", "NH", "NJ", "NM", "NV", "OH", "OK", "OR", "PA", "RI", "SC",
    "SD", "TN", "UT", "VA", "VT", "WI", "WV", "WY",
];

pub const INSTITUTION_WORDS: &[&str] = &[
    "Meridian", "Summit", "Harborview", "Lakeshore", "Pinecrest", "Bayside", "Northfield", "Stonebridge", "Evergreen", "Silverlake",
    "Brightwater", "Ridgeview", "Oakmont", "Sunnyvale", "Westbrook", "Clearview", "Highland", "Maplewood", "Rosewood", "Fairhaven",
    "Cornerstone", "Keystone", "Landmark", "Pioneer", "Heritage", "Unity", "Beacon", "Horizon", "Crescent", "Liberty",
];

pub const WEB_WORDS: &[&str] = &[
    "amber", "basil", "cobalt", "delta", "ember", "falcon", "garnet", "harbor", "indigo", "jasper",
    "kepler", "lumen", "mosaic", "nimbus", "onyx", "pixel", "quartz", "raven", "sierra", "tundra",
    "umber", "vertex", "wren", "xenon", "yonder", "zephyr",
];

/// Structural web tokens left untouched.
pub const WEB_KEEP: &[&str] = &[
    "http", "https", "www", "mailto", "com", "org", "net", "edu", "gov", "io", "html", "htm",
];
