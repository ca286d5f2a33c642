//! Classes and properties of the course ontology.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Author,
    Course,
    Publisher,
    Year,
    Subject,
    Place,
    Price,
}

impl Class {
    pub const ALL: [Class; 7] = [
        Class::Author,
        Class::Course,
        Class::Publisher,
        Class::Year,
        Class::Subject,
        Class::Place,
        Class::Price,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Class::Author => "Author",
            Class::Course => "Course",
            Class::Publisher => "Publisher",
            Class::Year => "Year",
            Class::Subject => "Subject",
            Class::Place => "Place",
            Class::Price => "Price",
        }
    }

    /// Namespace prefix used when printing queries.
    pub fn prefix(self) -> &'static str {
        match self {
            Class::Author => "cs_author",
            Class::Course => "cs_name",
            Class::Publisher => "cs_publisher",
            Class::Year => "cs_created",
            Class::Subject => "cs_subject",
            Class::Place => "cs_place",
            Class::Price => "cs_price",
        }
    }

    pub fn from_prefix(prefix: &str) -> Option<Class> {
        Class::ALL.into_iter().find(|c| c.prefix() == prefix)
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    Write,
    IsWrittenBy,
    Publish,
    IsPublishedBy,
    IsWrittenIn,
    HasSubject,
    PublishedAt,
    LocatedAt,
    HasPrice,
    Content,
}

/// What a property may point at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Range {
    Class(Class),
    Literal,
}

impl Property {
    pub const ALL: [Property; 10] = [
        Property::Write,
        Property::IsWrittenBy,
        Property::Publish,
        Property::IsPublishedBy,
        Property::IsWrittenIn,
        Property::HasSubject,
        Property::PublishedAt,
        Property::LocatedAt,
        Property::HasPrice,
        Property::Content,
    ];

    /// Pairs (p, q) with p(a, b) entailing q(b, a) and vice versa.
    pub const INVERSE_PAIRS: [(Property, Property); 2] = [
        (Property::Write, Property::IsWrittenBy),
        (Property::Publish, Property::IsPublishedBy),
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Property::Write => "write",
            Property::IsWrittenBy => "isWrittenBy",
            Property::Publish => "publish",
            Property::IsPublishedBy => "isPublishedBy",
            Property::IsWrittenIn => "isWrittenIn",
            Property::HasSubject => "hasSubject",
            Property::PublishedAt => "publishedAt",
            Property::LocatedAt => "locatedAt",
            Property::HasPrice => "hasPrice",
            Property::Content => "content",
        }
    }

    pub fn parse(name: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.as_str() == name)
    }

    /// `None` for `content`, which applies to every class.
    pub fn domain(self) -> Option<Class> {
        Some(match self {
            Property::Write => Class::Author,
            Property::IsWrittenBy => Class::Course,
            Property::Publish => Class::Publisher,
            Property::IsPublishedBy => Class::Course,
            Property::IsWrittenIn => Class::Course,
            Property::HasSubject => Class::Course,
            Property::PublishedAt => Class::Course,
            Property::LocatedAt => Class::Publisher,
            Property::HasPrice => Class::Course,
            Property::Content => return None,
        })
    }

    pub fn range(self) -> Range {
        match self {
            Property::Write => Range::Class(Class::Course),
            Property::IsWrittenBy => Range::Class(Class::Author),
            Property::Publish => Range::Class(Class::Course),
            Property::IsPublishedBy => Range::Class(Class::Publisher),
            Property::IsWrittenIn => Range::Class(Class::Year),
            Property::HasSubject => Range::Class(Class::Subject),
            Property::PublishedAt => Range::Class(Class::Place),
            Property::LocatedAt => Range::Class(Class::Place),
            Property::HasPrice => Range::Class(Class::Price),
            Property::Content => Range::Literal,
        }
    }

    pub fn inverse(self) -> Option<Property> {
        Property::INVERSE_PAIRS.iter().find_map(|&(p, q)| {
            if p == self {
                Some(q)
            } else if q == self {
                Some(p)
            } else {
                None
            }
        })
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
