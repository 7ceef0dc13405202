#![allow(dead_code)]

/// The availability table, typed in by hand: (category, group, tiktok,
/// instagram, youtube, minimum fields as printed).
pub const TABLE: &[(&str, &str, &str, &str, &str, &str)] = &[
    ("watch", "usage", "Y", "N", "Y", "Content Id, ts"),
    ("search", "usage", "Y", "Y", "Y", "Query term, ts"),
    ("comment", "usage", "Nstar", "Y", "Y", "Comment text, Content Id, ts"),
    ("like", "usage", "Y", "Y", "Yg", "Content Id, ts"),
    ("message", "usage", "Y", "Y", "NA", "Content, User Id, ts"),
    ("save", "usage", "Y", "Y", "Y", "Content Id, ts"),
    ("share_in_app", "usage", "Y", "Y", "NA", "Content Id, ts"),
    ("share_across_app", "usage", "Y", "N", "N", "Content Id, ts"),
    ("interests", "usage", "Y", "Y", "N", "List of topics"),
    ("time_spent", "usage", "Nstar", "Nstar", "Nstar", "Duration/frequency"),
    ("content_media", "content", "Y", "Y", "Y", "Media file/URL"),
    ("content_text", "content", "Y", "Y", "Y", "title"),
    ("content_location", "content", "Y", "Y", "Y", "Some place identifiers"),
    ("content_datetime", "content", "Y", "Y", "Y", "ts"),
    ("content_device", "content", "Dash", "Y", "Yg", "Device model, OS"),
    ("other_user_interactions", "content", "Nstar", "Nstar", "Nstar", "Likes, Comments"),
    ("account_details", "personal", "Y", "Y", "Yg", "Username, DOB, Email, Profile photo"),
    ("connections", "personal", "Y", "Y", "Y", "Username, ts"),
    ("login_history", "personal", "Y", "Y", "Yg", "IP, ts"),
    ("current_devices", "personal", "Y", "Y", "Yg", "User agent"),
    ("current_camera", "personal", "NA", "Y", "NA", "Version/type"),
    ("personal_location", "personal", "Y", "Y", "Yg", "Place identifiers"),
    ("account_changes", "personal", "Dash", "Y", "N", "Type, Old, New values, ts"),
    ("ads_viewed", "advertisements", "N", "N", "Y", "Content Id, ts"),
    ("ad_personalization", "advertisements", "Nstar", "N", "N", "Reasons why the ad was shown"),
    ("ad_data_access", "advertisements", "N", "Y", "N", "Which and how (in store visit etc.)"),
    ("off_platform", "miscellaneous", "Y", "Y", "N", "Platform, ts, activity"),
    ("link_history", "miscellaneous", "Dash", "Y", "Dash", "Link, ts"),
    ("cookies", "miscellaneous", "Dash", "Y", "Dash", "-"),
];
