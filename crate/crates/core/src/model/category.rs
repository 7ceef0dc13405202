use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryGroup {
    Usage,
    Content,
    Personal,
    Advertisements,
    Miscellaneous,
}

impl CategoryGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            CategoryGroup::Usage => "usage",
            CategoryGroup::Content => "content",
            CategoryGroup::Personal => "personal",
            CategoryGroup::Advertisements => "advertisements",
            CategoryGroup::Miscellaneous => "miscellaneous",
        }
    }
}

macro_rules! categories {
    ($( $variant:ident => ($id:literal, $group:ident, $label:literal, [$($field:literal),*]) ),+ $(,)?) => {
        /// One row of the data-transparency overview. Declaration order is the
        /// row order and doubles as the record sort order.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum DataCategory {
            $($variant),+
        }

        impl DataCategory {
            pub const ALL: &'static [DataCategory] = &[$(DataCategory::$variant),+];

            pub fn id(self) -> &'static str {
                match self { $(DataCategory::$variant => $id),+ }
            }

            pub fn group(self) -> CategoryGroup {
                match self { $(DataCategory::$variant => CategoryGroup::$group),+ }
            }

            /// Human label used in rendered reports.
            pub fn label(self) -> &'static str {
                match self { $(DataCategory::$variant => $label),+ }
            }

            /// Canonical names of the minimum expected fields. `timestamp` is
            /// the record timestamp; every other name is an attribute key.
            pub fn min_fields(self) -> &'static [&'static str] {
                match self { $(DataCategory::$variant => &[$($field),*]),+ }
            }
        }
    };
}

categories! {
    Watch => ("watch", Usage, "Watch", ["content_id", "timestamp"]),
    Search => ("search", Usage, "Search", ["query", "timestamp"]),
    Comment => ("comment", Usage, "Comment", ["comment_text", "content_id", "timestamp"]),
    Like => ("like", Usage, "Like", ["content_id", "timestamp"]),
    Message => ("message", Usage, "Messages", ["content", "user_id", "timestamp"]),
    Save => ("save", Usage, "Save/Favourite", ["content_id", "timestamp"]),
    ShareInApp => ("share_in_app", Usage, "Share (in-app)", ["content_id", "timestamp"]),
    ShareAcrossApp => ("share_across_app", Usage, "Share (across-app)", ["content_id", "timestamp"]),
    Interests => ("interests", Usage, "Interests/Topics", ["topic"]),
    TimeSpent => ("time_spent", Usage, "Time spent", ["duration"]),
    ContentMedia => ("content_media", Content, "Media", ["media"]),
    ContentText => ("content_text", Content, "Text details", ["title"]),
    ContentLocation => ("content_location", Content, "Location", ["place"]),
    ContentDatetime => ("content_datetime", Content, "Date time", ["timestamp"]),
    ContentDevice => ("content_device", Content, "Device", ["device_model", "os"]),
    OtherUserInteractions => ("other_user_interactions", Content, "Other user interactions", ["likes", "comments"]),
    AccountDetails => ("account_details", Personal, "Account details", ["username", "dob", "email", "profile_photo"]),
    Connections => ("connections", Personal, "Connections", ["username", "timestamp"]),
    LoginHistory => ("login_history", Personal, "Login history", ["ip", "timestamp"]),
    CurrentDevices => ("current_devices", Personal, "Current devices", ["user_agent"]),
    CurrentCamera => ("current_camera", Personal, "Current camera", ["version"]),
    PersonalLocation => ("personal_location", Personal, "Location", ["place"]),
    AccountChanges => ("account_changes", Personal, "Account changes", ["change_type", "old_value", "new_value", "timestamp"]),
    AdsViewed => ("ads_viewed", Advertisements, "Ads viewed", ["content_id", "timestamp"]),
    AdPersonalization => ("ad_personalization", Advertisements, "Personalization", ["reason"]),
    AdDataAccess => ("ad_data_access", Advertisements, "Access to your data", ["advertiser", "access_type"]),
    OffPlatform => ("off_platform", Miscellaneous, "Off-platform", ["source_platform", "timestamp", "activity"]),
    LinkHistory => ("link_history", Miscellaneous, "Link history", ["link", "timestamp"]),
    Cookies => ("cookies", Miscellaneous, "Cookies", []),
}

/// Minimum-field names that identify content, a query, or a counterpart.
const IDENTIFIER_FIELDS: &[&str] = &["content_id", "query", "user_id", "topic", "media", "username", "link"];

impl DataCategory {
    /// Whether `context_id` must be non-empty for records of this category.
    pub fn requires_context(self) -> bool {
        self.min_fields().iter().any(|f| IDENTIFIER_FIELDS.contains(f))
    }

    pub fn requires_timestamp(self) -> bool {
        self.min_fields().contains(&"timestamp")
    }

    /// Parses a comma-separated list of category ids.
    pub fn parse_list(s: &str) -> Result<Vec<DataCategory>, Error> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for DataCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for DataCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DataCategory::ALL
            .iter()
            .copied()
            .find(|c| c.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown data category `{s}`")))
    }
}
